"""Maximal-perimeter inscribed n-gons (the Birkhoff maximisers L_n)."""
import logging
import math

import numpy as np
from scipy import linalg

from billiardlib.dynamics.billiard import (Orbit, PhaseState,
                                         reflection_residuals)
from billiardlib.kernel.table import BilliardTable
from billiardlib.lazutkin.chart import LazutkinChart, build_chart
from billiardlib.structures import exceptions
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances
from billiardlib.utillib import functions

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-12
GRADIENT_FLOOR = 1e-14
GAIN_FLOOR = 1e-15
ROUNDOFF_GAIN = 1e-13
STEP_CAP = 0.5
ARMIJO = 1e-4
MAX_BACKTRACKS = 60


def _vertices(table: BilliardTable, s: np.ndarray) -> np.ndarray:
  return table.point(s)


def perimeter(table: BilliardTable, s: np.ndarray) -> float:
  """Perimeter of the polygon with vertices gamma(s_1), ..., gamma(s_n)."""
  points = _vertices(table, s)
  sides = np.roll(points, -1, axis=0) - points
  return math.fsum(np.hypot(sides[:, 0], sides[:, 1]))


def _derivatives(table: BilliardTable,
                 s: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
  """
  Perimeter, gradient and Hessian in the vertex arclengths.

  Side i joins vertex i (A) to vertex i + 1 (B), with unit direction u and
  length l; the Hessian is cyclic tridiagonal.
  """
  n = len(s)
  points = _vertices(table, s)
  angles = np.asarray(table.tangent_angle(s))
  kappa = np.asarray(table.kappa(s))
  tangents = functions.unit_vector(angles)
  normals = functions.unit_vector(angles + 0.5 * np.pi)

  sides = np.roll(points, -1, axis=0) - points
  lengths = np.hypot(sides[:, 0], sides[:, 1])
  u = sides / lengths[:, None]
  t_a, n_a, k_a = tangents, normals, kappa
  t_b = np.roll(tangents, -1, axis=0)
  n_b = np.roll(normals, -1, axis=0)
  k_b = np.roll(kappa, -1)

  u_ta = np.einsum('ij,ij->i', u, t_a)
  u_tb = np.einsum('ij,ij->i', u, t_b)
  gradient = -u_ta + np.roll(u_tb, 1)

  diag_a = functions.cross2(u, t_a)**2 / lengths - k_a * np.einsum(
      'ij,ij->i', u, n_a)
  diag_b = functions.cross2(u, t_b)**2 / lengths + k_b * np.einsum(
      'ij,ij->i', u, n_b)
  mixed = (-np.einsum('ij,ij->i', t_a, t_b) + u_ta * u_tb) / lengths

  index = np.arange(n)
  following = np.roll(index, -1)
  hessian = np.zeros((n, n))
  np.add.at(hessian, (index, index), diag_a)
  np.add.at(hessian, (following, following), diag_b)
  np.add.at(hessian, (index, following), mixed)
  np.add.at(hessian, (following, index), mixed)
  return math.fsum(lengths), gradient, hessian


def _ascent_step(gradient: np.ndarray, hessian: np.ndarray) -> np.ndarray:
  """
  Newton step on the Hessian with every eigenvalue made negative.

  Positive eigenvalues are flipped and those within roundoff of zero are
  pinned to `-EIGEN_FLOOR * max|eigenvalue|`; negative eigenvalues are kept.
  """
  eigenvalues, vectors = linalg.eigh(hessian)
  floor = EIGEN_FLOOR * max(float(np.max(np.abs(eigenvalues))), 1e-300)
  clipped = -np.maximum(np.abs(eigenvalues), floor)
  return vectors @ ((vectors.T @ gradient) / -clipped)


def _orbit(table: BilliardTable, s: np.ndarray) -> Orbit:
  points = _vertices(table, s)
  sides = np.roll(points, -1, axis=0) - points
  chords = np.hypot(sides[:, 0], sides[:, 1])
  tangents = functions.unit_vector(np.asarray(table.tangent_angle(s)))
  phis = np.arctan2(functions.cross2(tangents, sides),
                    np.einsum('ij,ij->i', tangents, sides))
  length = table.length
  states = tuple(
      PhaseState(math.fmod(si, length) % length, float(phi))
      for si, phi in zip(s, phis))
  residual = float(np.max(reflection_residuals(table, s)))
  return Orbit(states, tuple(float(c) for c in chords), math.fsum(chords),
               True, len(s), residual, s.copy())


def max_perimeter_ngon(table: BilliardTable,
                       n: int,
                       tolerances: Tolerances = DEFAULT_TOLERANCES,
                       chart: LazutkinChart | None = None) -> Orbit:
  """
  Maximise the perimeter of inscribed n-gons with winding number one.

  The seed is equally spaced in the Lazutkin coordinate. Every sweep is a
  regularised Newton step over all vertices, capped so the vertices keep
  their cyclic order, with Armijo backtracking. The iteration is converged
  once the gradient is at roundoff level, or once every bounce obeys the
  reflection law to `tolerances.reflection` and the predicted Newton gain is
  below 1e-15 of the perimeter. A stalled iteration (largest move below
  `ngon_step_rel * l0`) is accepted only if the reflection law holds.

  Args:
      table (BilliardTable): The table.
      n (int): Number of vertices, at least 2.
      tolerances (Tolerances, optional): Reflection and step tolerances and
        the sweep cap.
      chart (LazutkinChart | None, optional): Chart used for seeding; built
        from the table when omitted.

  Returns:
      Orbit: The maximal n-periodic billiard orbit; its perimeter is L_n.

  Raises:
      NoConvergence: After `tolerances.max_sweeps` sweeps, or when the
        iteration stalls with a reflection residual above
        `tolerances.reflection`.
  """
  if n < 2:
    raise exceptions.PreconditionError(f'n-gon needs n >= 2, got {n}')
  if chart is None:
    chart = build_chart(table)
  length = table.length
  s = np.asarray(chart.s_of_x(np.arange(n) / n), dtype=float)
  step_tol = tolerances.ngon_step_rel * length

  for sweep in range(1, tolerances.max_sweeps + 1):
    value, gradient, hessian = _derivatives(table, s)
    if np.max(np.abs(gradient)) <= GRADIENT_FLOOR:
      break
    step = _ascent_step(gradient, hessian)
    gain = float(gradient @ step)
    if gain <= GAIN_FLOOR * value and np.max(
        reflection_residuals(table, s)) <= tolerances.reflection:
      break
    gaps = np.diff(np.append(s, s[0] + length))
    largest = float(np.max(np.abs(step)))
    limit = STEP_CAP * float(np.min(gaps))
    if largest > limit:
      step *= limit / largest
      gain = float(gradient @ step)

    if gain <= ROUNDOFF_GAIN * value:
      accepted = 1.0
    else:
      accepted = 0.0
      t = 1.0
      for _ in range(MAX_BACKTRACKS):
        if perimeter(table, s + t * step) >= value + ARMIJO * t * gain:
          accepted = t
          break
        t *= 0.5
      if accepted == 0.0:
        raise exceptions.NoConvergence(
            f'line search failed for n={n} at sweep {sweep}')
    s = s + accepted * step
    moved = accepted * float(np.max(np.abs(step)))
    logger.debug('n=%d sweep %d: perimeter %.17g, move %.2e', n, sweep,
                 value, moved)
    if moved <= step_tol:
      break
  else:
    raise exceptions.NoConvergence(
        f'n={n} did not converge in {tolerances.max_sweeps} sweeps')

  offset = math.floor(s[0] / length) * length
  orbit = _orbit(table, s - offset)
  if orbit.closure_residual > tolerances.reflection:
    raise exceptions.NoConvergence(
        f'n={n} stalled with reflection residual {orbit.closure_residual:.2e}'
        f' > {tolerances.reflection:.0e}')
  return orbit
