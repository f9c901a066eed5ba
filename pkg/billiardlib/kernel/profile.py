"""Curvature profiles and the plane geometry they integrate to.

A profile stores the curvature of an arc as a function of arclength: a
constant base value plus compactly supported smooth bumps. Everything else
(tangent angle, points, chords) is derived from it by quadrature.
"""
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import numpy.typing as npt

from billiardlib.common import common
from billiardlib.structures import exceptions, protocols
from billiardlib.structures.settings import DEFAULT_TOLERANCES
from billiardlib.utillib import functions

logger = logging.getLogger(__name__)

MAX_PANEL_TURNING = 0.25
MIN_SAMPLES = 4097
TAIL_PER_ACCURACY = 1e-2


def bump_shape(u: npt.ArrayLike) -> np.ndarray:
  """Peak-normalised bump exp(1 - 1/(1 - u^2)) on |u| < 1, zero elsewhere."""
  return bump_shape_derivatives(u)[0]


def bump_shape_derivatives(u: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
  """
  The bump shape and its first derivative in closed form.

  Args:
      u (npt.ArrayLike): Normalised abscissae.

  Returns:
      tuple[np.ndarray, np.ndarray]: psi and psi'.
  """
  u = np.asarray(u, dtype=float)
  psi = np.zeros_like(u)
  d1 = np.zeros_like(u)
  inside = np.abs(u) < 1.0
  if np.any(inside):
    ui = u[inside]
    w = 1.0 - ui * ui
    values = np.exp(1.0 - 1.0 / w)
    live = values > 0.0
    first = np.zeros_like(values)
    first[live] = values[live] * (-2.0 * ui[live] / w[live]**2)
    psi[inside] = values
    d1[inside] = first
  return psi, d1


@functools.cache
def bump_primitive() -> functions.PiecewiseChebyshev:
  """Primitive of the bump shape on [-1, 1], zero at -1."""
  shape = functions.PiecewiseChebyshev.fit(bump_shape,
                                           np.linspace(-1.0, 1.0, 17))
  return shape.antiderivative()


@functools.cache
def bump_mass() -> float:
  """Integral of the bump shape over [-1, 1] (about 1.2069)."""
  return bump_primitive().total()


@dataclass(frozen=True)
class Bump:
  """
  A compactly supported smooth curvature bump.

  Attributes:
      center (float): Arclength of the peak.
      halfwidth (float): Half of the support length, > 0.
      amplitude (float): Curvature change at the peak (1/length).
  """
  center: float
  halfwidth: float
  amplitude: float

  def __post_init__(self) -> None:
    if not self.halfwidth > 0:
      raise exceptions.PreconditionError(
          f'bump halfwidth must be positive, got {self.halfwidth}')

  @property
  def lo(self) -> float:
    return self.center - self.halfwidth

  @property
  def hi(self) -> float:
    return self.center + self.halfwidth

  @property
  def turning(self) -> float:
    """Total tangent-angle change contributed by the bump."""
    return self.amplitude * self.halfwidth * bump_mass()

  def _u(self, s: npt.ArrayLike) -> np.ndarray:
    return (np.asarray(s, dtype=float) - self.center) / self.halfwidth

  def kappa(self, s: npt.ArrayLike) -> np.ndarray:
    return self.amplitude * bump_shape(self._u(s))

  def kappa_prime(self, s: npt.ArrayLike) -> np.ndarray:
    return self.amplitude * bump_shape_derivatives(
        self._u(s))[1] / self.halfwidth

  def primitive(self, s: npt.ArrayLike) -> np.ndarray:
    """Integral of the bump curvature from -infinity to s."""
    u = self._u(s)
    inner = np.asarray(bump_primitive()(np.clip(u, -1.0, 1.0)))
    values = np.where(u <= -1.0, 0.0, np.where(u >= 1.0, bump_mass(), inner))
    return self.amplitude * self.halfwidth * values

  def mirrored(self, length: float) -> 'Bump':
    """The bump reflected about the midpoint of [0, length]."""
    return Bump(length - self.center, self.halfwidth, self.amplitude)

  def shifted(self, offset: float) -> 'Bump':
    return Bump(self.center + offset, self.halfwidth, self.amplitude)

  def scaled(self, factor: float) -> 'Bump':
    return Bump(self.center * factor, self.halfwidth * factor,
                self.amplitude / factor)


def _sum_bumps(bumps: Iterable[Bump], attribute: str,
               s: np.ndarray) -> np.ndarray:
  total = np.zeros_like(s)
  for bump in bumps:
    total = total + getattr(bump, attribute)(s)
  return total


@dataclass(frozen=True)
class CurvatureProfile:
  """
  Curvature of an arc as base value plus interior bumps.

  Attributes:
      base (float): Constant curvature away from the bumps, > 0.
      bumps (tuple[Bump, ...]): Bumps whose supports lie inside (0, length).
      length (float): Arclength of the arc, > 0.

  Methods:
      kappa, kappa_prime: Closed-form curvature and its derivative.
      tangent_angle: Integral of the curvature from 0.
      geometry: Lazily built plane reconstruction of the arc.
  """
  base: float
  bumps: tuple[Bump, ...] = ()
  length: float = 1.0

  def __post_init__(self) -> None:
    object.__setattr__(self, 'bumps', tuple(self.bumps))
    if not self.base > 0:
      raise exceptions.PreconditionError(
          f'base curvature must be positive, got {self.base}')
    if not self.length > 0:
      raise exceptions.PreconditionError(
          f'profile length must be positive, got {self.length}')
    for bump in self.bumps:
      if not (bump.lo > 0.0 and bump.hi < self.length):
        raise exceptions.PreconditionError(
            f'bump support [{bump.lo}, {bump.hi}] not inside '
            f'(0, {self.length})')

  def check_domain(self, s: npt.ArrayLike) -> None:
    s_arr = np.asarray(s, dtype=float)
    if s_arr.size and (np.min(s_arr) < 0.0 or np.max(s_arr) > self.length):
      bad = s_arr[(s_arr < 0.0) | (s_arr > self.length)].ravel()[0]
      raise exceptions.DomainError(float(bad), self.length)

  def kappa(self, s: npt.ArrayLike) -> float | np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    values = self.base + _sum_bumps(self.bumps, 'kappa', s_arr)
    return common.as_output(values, s)

  def kappa_prime(self, s: npt.ArrayLike) -> float | np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    return common.as_output(_sum_bumps(self.bumps, 'kappa_prime', s_arr), s)

  def tangent_angle(self, s: npt.ArrayLike) -> float | np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    values = self.base * s_arr + _sum_bumps(self.bumps, 'primitive', s_arr)
    return common.as_output(values, s)

  @property
  def turning(self) -> float:
    """Total turning: base * length plus the bump contributions."""
    return math.fsum([self.base * self.length] +
                     [bump.turning for bump in self.bumps])

  def breakpoints(self) -> np.ndarray:
    marks = [0.0, self.length]
    for bump in self.bumps:
      marks.extend([bump.lo, bump.center, bump.hi])
    return np.unique(np.clip(marks, 0.0, self.length))

  def sample_grid(self, count: int = MIN_SAMPLES) -> np.ndarray:
    """Uniform grid merged with the breakpoints and finer bump grids."""
    parts = [np.linspace(0.0, self.length, count), self.breakpoints()]
    for bump in self.bumps:
      parts.append(np.linspace(bump.lo, bump.hi, 65))
    return np.unique(np.clip(np.concatenate(parts), 0.0, self.length))

  def min_kappa(self) -> float:
    return float(np.min(self.kappa(self.sample_grid())))

  def with_bumps(self, extra: Iterable[Bump]) -> 'CurvatureProfile':
    return CurvatureProfile(self.base, self.bumps + tuple(extra), self.length)

  def scaled(self, factor: float) -> 'CurvatureProfile':
    """The profile of the arc enlarged by `factor`."""
    return CurvatureProfile(self.base / factor,
                            tuple(b.scaled(factor) for b in self.bumps),
                            self.length * factor)

  @functools.cached_property
  def geometry(self) -> 'ProfileGeometry':
    return ProfileGeometry.build(self)


@dataclass(frozen=True)
class GluedProfile:
  """
  Concatenation of curvature profiles that do not share a base curvature.

  Attributes:
      pieces (tuple[CurvatureProfile, ...]): Profiles in gluing order.
  """
  pieces: tuple[CurvatureProfile, ...]
  offsets: np.ndarray = field(init=False, repr=False, compare=False)
  turnings: np.ndarray = field(init=False, repr=False, compare=False)

  def __post_init__(self) -> None:
    object.__setattr__(self, 'pieces', tuple(self.pieces))
    lengths = [p.length for p in self.pieces]
    object.__setattr__(self, 'offsets',
                       np.concatenate([[0.0], np.cumsum(lengths)]))
    turning = [p.turning for p in self.pieces]
    object.__setattr__(self, 'turnings',
                       np.concatenate([[0.0], np.cumsum(turning)]))

  @property
  def length(self) -> float:
    return math.fsum(p.length for p in self.pieces)

  @property
  def turning(self) -> float:
    return math.fsum(p.turning for p in self.pieces)

  def _dispatch(self, s: npt.ArrayLike, attribute: str,
                add_turning: bool = False) -> float | np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    idx = np.clip(
        np.searchsorted(self.offsets, s_arr, side='right') - 1, 0,
        len(self.pieces) - 1)
    values = np.zeros_like(s_arr)
    for k, piece in enumerate(self.pieces):
      mask = idx == k
      if not np.any(mask):
        continue
      local = np.clip(s_arr[mask] - self.offsets[k], 0.0, piece.length)
      part = np.asarray(getattr(piece, attribute)(local))
      if add_turning:
        part = part + self.turnings[k]
      values[mask] = part
    return common.as_output(values, s)

  def kappa(self, s: npt.ArrayLike) -> float | np.ndarray:
    return self._dispatch(s, 'kappa')

  def kappa_prime(self, s: npt.ArrayLike) -> float | np.ndarray:
    return self._dispatch(s, 'kappa_prime')

  def tangent_angle(self, s: npt.ArrayLike) -> float | np.ndarray:
    return self._dispatch(s, 'tangent_angle', add_turning=True)

  def breakpoints(self) -> np.ndarray:
    marks = [self.offsets]
    for offset, piece in zip(self.offsets, self.pieces):
      marks.append(piece.breakpoints() + offset)
    return np.unique(np.concatenate(marks))

  def check_domain(self, s: npt.ArrayLike) -> None:
    s_arr = np.asarray(s, dtype=float)
    if s_arr.size and (np.min(s_arr) < 0.0 or np.max(s_arr) > self.length):
      bad = s_arr[(s_arr < 0.0) | (s_arr > self.length)].ravel()[0]
      raise exceptions.DomainError(float(bad), self.length)

  @functools.cached_property
  def geometry(self) -> 'ProfileGeometry':
    return ProfileGeometry.build(self)


def _panel_edges(profile: protocols.ArcProfile) -> np.ndarray:
  """Breakpoints refined so no panel turns by more than MAX_PANEL_TURNING."""
  marks = profile.breakpoints()
  edges = [marks[:1]]
  angles = np.asarray(profile.tangent_angle(marks))
  for left, right, turn in zip(marks[:-1], marks[1:], np.diff(angles)):
    pieces = max(1, int(math.ceil(abs(turn) / MAX_PANEL_TURNING)))
    edges.append(np.linspace(left, right, pieces + 1)[1:])
  return np.concatenate(edges)


@dataclass(frozen=True)
class ProfileGeometry:
  """
  Plane reconstruction of an arc from its curvature profile.

  The arc starts at the origin with tangent angle 0. Coordinates are the
  primitives of cos(theta) and sin(theta), each held as a piecewise
  Chebyshev approximation whose panel tails are below
  `TAIL_PER_ACCURACY * accuracy` (1e-14 for the default accuracy 1e-12).

  Attributes:
      profile (ArcProfile): The profile being reconstructed.
      x_primitive (PiecewiseChebyshev): x(s).
      y_primitive (PiecewiseChebyshev): y(s).
  """
  profile: protocols.ArcProfile
  x_primitive: functions.PiecewiseChebyshev
  y_primitive: functions.PiecewiseChebyshev

  @classmethod
  def build(
      cls,
      profile: protocols.ArcProfile,
      accuracy: float = DEFAULT_TOLERANCES.geometry) -> 'ProfileGeometry':
    edges = _panel_edges(profile)
    tail = TAIL_PER_ACCURACY * accuracy
    x_panels = functions.PiecewiseChebyshev.fit(
        lambda s: np.cos(profile.tangent_angle(s)), edges, tol=tail)
    y_panels = functions.PiecewiseChebyshev.fit(
        lambda s: np.sin(profile.tangent_angle(s)), edges, tol=tail)
    logger.debug('geometry of length %.6g built on %d/%d panels',
                 profile.length, x_panels.panel_count, y_panels.panel_count)
    return cls(profile, x_panels.antiderivative(), y_panels.antiderivative())

  def point(self, s: npt.ArrayLike) -> np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    return np.stack([
        np.asarray(self.x_primitive(s_arr)),
        np.asarray(self.y_primitive(s_arr))
    ],
                    axis=-1)

  @property
  def end_point(self) -> np.ndarray:
    return self.point(self.profile.length)


def eval_geometry(
    profile: protocols.ArcProfile,
    s: float) -> tuple[np.ndarray, float, float, float]:
  """
  Point, tangent angle, curvature and curvature derivative at arclength s.

  Args:
      profile (ArcProfile): A curvature profile (single or glued).
      s (float): Arclength in [0, profile.length].

  Returns:
      tuple[np.ndarray, float, float, float]: point, tangent_angle, kappa and
        kappa_prime, in the local frame of the profile.

  Raises:
      DomainError: If s is outside [0, profile.length].
  """
  profile.check_domain(s)
  point = profile.geometry.point(s)
  return (point, float(profile.tangent_angle(s)), float(profile.kappa(s)),
          float(profile.kappa_prime(s)))
