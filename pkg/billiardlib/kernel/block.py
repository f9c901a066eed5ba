"""Symmetric building blocks and their closure-preserving perturbation."""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import optimize

from billiardlib.kernel.motion import RigidMotion
from billiardlib.kernel.profile import (Bump, CurvatureProfile, bump_mass,
                                        bump_primitive)
from billiardlib.structures import exceptions
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances
from billiardlib.utillib import functions

logger = logging.getLogger(__name__)

DELTA_LIMIT = 0.5
SYMMETRY_SAMPLES = 2**10
MAX_SOLVER_ITERATIONS = 50


@dataclass(frozen=True)
class BuildingBlock:
  """
  A symmetric, positively curved, non-closed arc.

  The profile must satisfy k(s) = k(a - s), so the arc is mirror symmetric
  about the normal line at its midpoint, and its total turning must lie in
  (0, pi).

  Attributes:
      profile (CurvatureProfile): The curvature profile of the block.

  Methods:
      point, tangent_angle, kappa: Boundary data in the block frame.
      end_motion: Rigid motion carrying the start frame to the end frame.
  """
  profile: CurvatureProfile

  def __post_init__(self) -> None:
    turning = self.profile.turning
    if not 0.0 < turning < math.pi:
      raise exceptions.PreconditionError(
          f'block turning {turning:.17g} outside (0, pi)')
    defect = self.symmetry_defect()
    if defect > DEFAULT_TOLERANCES.symmetry:
      raise exceptions.PreconditionError(
          f'block profile not symmetric, defect {defect:.3e}')
    min_kappa = self.profile.min_kappa()
    if not min_kappa > 0.0:
      raise exceptions.ConvexityError(min_kappa, 0.0)

  @property
  def closed(self) -> bool:
    return False

  @property
  def length(self) -> float:
    return self.profile.length

  @property
  def base(self) -> float:
    return self.profile.base

  @property
  def turning(self) -> float:
    return self.profile.turning

  @functools.cached_property
  def end_point(self) -> np.ndarray:
    return self.profile.geometry.end_point

  @property
  def chord(self) -> float:
    return float(np.hypot(*self.end_point))

  @property
  def end_motion(self) -> RigidMotion:
    """Motion taking (origin, angle 0) to (end point, end tangent angle)."""
    end = self.end_point
    return RigidMotion(self.turning, (end[0], end[1]))

  def symmetry_defect(self, samples: int = SYMMETRY_SAMPLES) -> float:
    """Largest |k(s) - k(a - s)| over a dyadic grid of the block."""
    s = self.length * np.arange(samples + 1) / samples
    return float(
        np.max(np.abs(self.profile.kappa(s) - self.profile.kappa(self.length -
                                                                 s))))

  def point(self, s: npt.ArrayLike) -> np.ndarray:
    return self.profile.geometry.point(s)

  def tangent_angle(self, s: npt.ArrayLike) -> float | np.ndarray:
    return self.profile.tangent_angle(s)

  def kappa(self, s: npt.ArrayLike) -> float | np.ndarray:
    return self.profile.kappa(s)

  def kappa_prime(self, s: npt.ArrayLike) -> float | np.ndarray:
    return self.profile.kappa_prime(s)

  def scaled(self, factor: float) -> 'BuildingBlock':
    return BuildingBlock(self.profile.scaled(factor))


def circle_block(turning: float, radius: float = 1.0) -> BuildingBlock:
  """An arc of a circle with the given turning angle."""
  return BuildingBlock(CurvatureProfile(1.0 / radius, (), radius * turning))


def sup_curvature_change(first: BuildingBlock, second: BuildingBlock) -> float:
  """Sup-norm distance between the curvature profiles of two blocks."""
  grid = np.unique(
      np.concatenate([
          first.profile.sample_grid(),
          np.clip(second.profile.sample_grid(), 0.0, first.length)
      ]))
  return float(
      np.max(np.abs(first.kappa(grid) - second.kappa(np.clip(grid, 0.0,
                                                          second.length)))))


@dataclass(frozen=True)
class BumpLayout:
  """
  Placement of the four bumps of a support perturbation.

  Positions are fractions of the support interval, so one layout can be
  reused on any support.

  Attributes:
      centers (tuple[float, ...]): Four distinct bump centres in (0, 1).
      halfwidth (float): Bump half-width as a fraction of the support width.
      free_index (int): Which bump carries the free amplitude.
  """
  centers: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
  halfwidth: float = 0.18
  free_index: int = 1

  def __post_init__(self) -> None:
    object.__setattr__(self, 'centers', tuple(float(c) for c in self.centers))
    if len(self.centers) != 4 or len(set(self.centers)) != 4:
      raise exceptions.PreconditionError(
          f'a layout needs four distinct centres, got {self.centers}')
    if not 0 <= self.free_index < 4:
      raise exceptions.PreconditionError(
          f'free index {self.free_index} not in 0..3')
    for centre in self.centers:
      if centre - self.halfwidth < 0.0 or centre + self.halfwidth > 1.0:
        raise exceptions.PreconditionError(
            f'bump at {centre} with halfwidth {self.halfwidth} leaves the '
            'support')

  @classmethod
  def random(cls, rng: np.random.Generator) -> 'BumpLayout':
    """A layout with well separated centres drawn from `rng`."""
    halfwidth = float(rng.uniform(0.12, 0.18))
    while True:
      centers = np.sort(rng.uniform(0.2, 0.8, size=4))
      if np.min(np.diff(centers)) >= 0.08:
        break
    return cls(tuple(centers), halfwidth, int(rng.integers(0, 4)))

  @property
  def solved_indices(self) -> list[int]:
    return [i for i in range(4) if i != self.free_index]

  def halfwidths(self, support: tuple[float, float]) -> np.ndarray:
    return np.full(4, self.halfwidth * (support[1] - support[0]))

  def positions(self, support: tuple[float, float]) -> np.ndarray:
    lo, hi = support
    return lo + (hi - lo) * np.asarray(self.centers)

  def bumps(self, support: tuple[float, float], amplitudes: npt.ArrayLike,
            length: float) -> list[Bump]:
    """First-half bumps and their mirror images about length / 2."""
    first_half = [
        Bump(float(c), float(h), float(a)) for c, h, a in zip(
            self.positions(support), self.halfwidths(support), amplitudes)
    ]
    return first_half + [b.mirrored(length) for b in first_half]


@dataclass(frozen=True)
class SupportConstraint:
  """
  Turning and end-point displacement of a support segment as functions of
  the four bump amplitudes.

  The tangent angle on the support is theta_0(s) + sum A_i h_i Psi_i(s),
  with Psi_i the unit bump primitive. The constraints ask the perturbed
  segment to turn by the same angle and end at the same point, so the curve
  is unchanged outside the support and its mirror image.
  """
  halfwidths: np.ndarray
  weights: np.ndarray
  base_phase: np.ndarray
  unit_primitives: np.ndarray

  @classmethod
  def build(cls, block: BuildingBlock, support: tuple[float, float],
            layout: BumpLayout) -> 'SupportConstraint':
    lo, hi = support
    centres = layout.positions(support)
    halfwidths = layout.halfwidths(support)
    marks = [lo, hi]
    for c, h in zip(centres, halfwidths):
      marks.extend([c - h, c, c + h])
    for bump in block.profile.bumps:
      marks.extend(m for m in (bump.lo, bump.center, bump.hi) if lo < m < hi)
    edges = functions.refine_edges(np.clip(marks, lo, hi), 4)
    nodes, weights = functions.composite_gauss_legendre(edges)
    unit = np.vstack([
        np.clip((nodes - c) / h, -1.0, 1.0)
        for c, h in zip(centres, halfwidths)
    ])
    primitive = bump_primitive()
    unit_primitives = np.where(unit >= 1.0, bump_mass(), primitive(unit))
    unit_primitives = np.where(unit <= -1.0, 0.0, unit_primitives)
    base_phase = np.exp(1j * np.asarray(block.tangent_angle(nodes)))
    return cls(halfwidths, weights, base_phase, unit_primitives)

  def _delta(self, amplitudes: np.ndarray) -> np.ndarray:
    return (amplitudes * self.halfwidths) @ self.unit_primitives

  def residual(self, amplitudes: np.ndarray) -> np.ndarray:
    turning = bump_mass() * float(np.dot(amplitudes, self.halfwidths))
    shift = np.sum(self.weights * self.base_phase *
                   (np.exp(1j * self._delta(amplitudes)) - 1.0))
    return np.array([turning, shift.real, shift.imag])

  def jacobian(self, amplitudes: np.ndarray) -> np.ndarray:
    phase = self.weights * self.base_phase * np.exp(
        1j * self._delta(amplitudes))
    columns = 1j * (self.unit_primitives @ phase) * self.halfwidths
    return np.vstack(
        [bump_mass() * self.halfwidths, columns.real, columns.imag])

  def linear_solution(self, free_index: int, free_amplitude: float,
                      solved: list[int]) -> np.ndarray:
    """Amplitudes solving the constraints linearised at zero."""
    matrix = self.jacobian(np.zeros(4))
    rhs = -matrix[:, free_index] * free_amplitude
    amplitudes = np.zeros(4)
    amplitudes[free_index] = free_amplitude
    amplitudes[solved] = np.linalg.solve(matrix[:, solved], rhs)
    return amplitudes


@functools.lru_cache(maxsize=64)
def _support_constraint(block: BuildingBlock, support: tuple[float, float],
                        layout: BumpLayout) -> SupportConstraint:
  return SupportConstraint.build(block, support, layout)


def _check_support(block: BuildingBlock, support: tuple[float, float]) -> None:
  lo, hi = support
  if not 0.0 < lo < hi < 0.5 * block.length:
    raise exceptions.PreconditionError(
        f'support [{lo}, {hi}] not strictly inside (0, {0.5 * block.length})')


def linear_response(block: BuildingBlock, support: tuple[float, float],
                    layout: BumpLayout) -> tuple[np.ndarray, float]:
  """
  Amplitudes and peak curvature change per unit of `delta`, to first order.

  Args:
      block (BuildingBlock): The block to perturb.
      support (tuple[float, float]): Support interval inside (0, a/2).
      layout (BumpLayout): Bump placement.

  Returns:
      tuple[np.ndarray, float]: Amplitudes for delta = 1 and the sup of the
        resulting curvature change.
  """
  support = (float(support[0]), float(support[1]))
  _check_support(block, support)
  constraint = _support_constraint(block, support, layout)
  amplitudes = constraint.linear_solution(layout.free_index, block.base,
                                          layout.solved_indices)
  grid = np.linspace(support[0], support[1], 2049)
  change = sum(
      b.kappa(grid) for b in layout.bumps(support, amplitudes, block.length)
      [:4])
  return amplitudes, float(np.max(np.abs(change)))


def perturbation_amplitudes(block: BuildingBlock,
                            support: tuple[float, float],
                            layout: BumpLayout,
                            delta: float) -> np.ndarray:
  """
  Solve the three constraint amplitudes for a given free amplitude.

  Raises:
      ConstraintSolveError: If the solver fails within 50 iterations.
  """
  support = (float(support[0]), float(support[1]))
  constraint = _support_constraint(block, support, layout)
  solved = layout.solved_indices
  free_amplitude = delta * block.base
  start = constraint.linear_solution(layout.free_index, free_amplitude,
                                     solved)

  def equations(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    amplitudes = start.copy()
    amplitudes[solved] = x
    return (constraint.residual(amplitudes),
            constraint.jacobian(amplitudes)[:, solved])

  result = optimize.root(equations,
                         start[solved],
                         jac=True,
                         method='hybr',
                         options={
                             'xtol': 1e-14,
                             'maxfev': MAX_SOLVER_ITERATIONS
                         })
  amplitudes = start.copy()
  amplitudes[solved] = result.x
  scale = max(1.0, block.length)
  if np.max(np.abs(constraint.residual(amplitudes))) > 1e-13 * scale:
    raise exceptions.ConstraintSolveError(
        f'constraint solve failed for delta={delta!r}: {result.message}')
  return amplitudes


def perturb_block(block: BuildingBlock,
                  support: tuple[float, float],
                  layout: BumpLayout,
                  delta: float,
                  tolerances: Tolerances = DEFAULT_TOLERANCES) -> BuildingBlock:
  """
  Add a symmetric four-bump perturbation supported on `support` and its
  mirror image, keeping the block identical outside them.

  One amplitude equals delta times the base curvature; the other three are
  solved so the support segment keeps its turning and end point. Total
  turning and endpoint chord are then preserved, which keeps every table
  glued from the block closed.

  Args:
      block (BuildingBlock): The block to perturb.
      support (tuple[float, float]): Interval [b, c] strictly inside (0, a/2).
      layout (BumpLayout): Bump placement inside the support.
      delta (float): Dimensionless free amplitude, |delta| <= 0.5.
      tolerances (Tolerances, optional): Preservation and convexity limits.

  Returns:
      BuildingBlock: The perturbed block (the input itself when delta == 0).

  Raises:
      ConstraintSolveError: If turning or chord are not preserved.
      ConvexityError: If the curvature falls to the convexity floor.
  """
  support = (float(support[0]), float(support[1]))
  _check_support(block, support)
  if abs(delta) > DELTA_LIMIT:
    raise exceptions.PreconditionError(
        f'|delta| = {abs(delta)} exceeds {DELTA_LIMIT}')
  if delta == 0.0:
    return block

  amplitudes = perturbation_amplitudes(block, support, layout, delta)
  profile = block.profile.with_bumps(
      layout.bumps(support, amplitudes, block.length))
  floor = tolerances.convexity_floor * block.base
  min_kappa = profile.min_kappa()
  if min_kappa <= floor:
    raise exceptions.ConvexityError(min_kappa, floor)
  perturbed = BuildingBlock(profile)

  turning_change = abs(perturbed.turning - block.turning)
  chord_change = abs(perturbed.chord - block.chord)
  if max(turning_change, chord_change) > tolerances.constraint:
    raise exceptions.ConstraintSolveError(
        f'perturbation changed turning by {turning_change:.3e} and chord by '
        f'{chord_change:.3e}')
  logger.debug('perturbed block on [%.6g, %.6g] with delta %.6g', *support,
               delta)
  return perturbed
