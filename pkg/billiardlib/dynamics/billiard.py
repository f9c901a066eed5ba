"""The billiard map on closed tables and on open blocks."""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize

from billiardlib.kernel.block import BuildingBlock
from billiardlib.kernel.table import BilliardTable
from billiardlib.structures import exceptions, protocols
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances
from billiardlib.utillib import functions

logger = logging.getLogger(__name__)

ENDPOINT_SIDE_TOL = 1e-12
EXIT_CHECK_TOL = 1e-6
ORBIT_STOP_FRACTION = 1e-7


@dataclass(frozen=True)
class PhaseState:
  """
  A point of the billiard phase space.

  Attributes:
      s (float): Boundary arclength (mod l0 on tables).
      phi (float): Angle in (0, pi) from the tangent to the outgoing chord.
  """
  s: float
  phi: float

  def __post_init__(self) -> None:
    if not 0.0 < self.phi < math.pi:
      raise exceptions.PreconditionError(
          f'phase angle {self.phi!r} outside (0, pi)')


@dataclass(frozen=True)
class Orbit:
  """
  A finite bounce sequence.

  Attributes:
      states (tuple[PhaseState, ...]): Phase state at each bounce.
      chords (tuple[float, ...]): Chord leaving each bounce.
      perimeter (float): Sum of the chords.
      closed (bool): Whether the sequence is periodic.
      period (int): Number of bounces.
      closure_residual (float): Residual of the periodicity check.
      arclengths (np.ndarray): Unwrapped arclength of each bounce.
  """
  states: tuple[PhaseState, ...]
  chords: tuple[float, ...]
  perimeter: float
  closed: bool
  period: int
  closure_residual: float = 0.0
  arclengths: np.ndarray = field(default_factory=lambda: np.zeros(0),
                                 compare=False,
                                 repr=False)


@dataclass(frozen=True)
class WallShot:
  """
  A shot from the start of an open block until it leaves the block.

  Attributes:
      bounces (tuple[float, ...]): Arclengths of the bounces after the start.
      angles (tuple[float, ...]): Outgoing angle at each bounce.
      escape_index (int): Index k of the last bounce (0 when none).
      exit_angle (float): Angle of the escaping chord at the last bounce.
      exit_arclength (float): Arclength of the last bounce point.
  """
  bounces: tuple[float, ...]
  angles: tuple[float, ...]
  escape_index: int
  exit_angle: float
  exit_arclength: float


class MatchResult(NamedTuple):
  matched: bool
  p: int
  residual: float


def _bracket_chord(side, guess: float, limit: float) -> tuple[float, float]:
  """Bracket the sign change of `side` on (0, limit]; side < 0 near 0."""
  sigma = min(guess, 0.5 * limit)
  if side(sigma) > 0.0:
    hi = sigma
    lo = 0.5 * sigma
    for _ in range(200):
      if side(lo) < 0.0:
        return lo, hi
      hi, lo = lo, 0.5 * lo
    raise exceptions.NoConvergence('could not bracket the chord from below')
  lo = sigma
  while True:
    sigma = min(2.0 * sigma, limit)
    if side(sigma) > 0.0:
      return lo, sigma
    if sigma >= limit:
      raise exceptions.NoConvergence('could not bracket the chord from above')
    lo = sigma


def advance(curve: protocols.BoundaryCurve,
            s: float,
            phi: float,
            tolerances: Tolerances = DEFAULT_TOLERANCES
           ) -> tuple[float, float, float]:
  """
  One step of the billiard map in unwrapped arclength.

  Args:
      curve (BoundaryCurve): A table or an open block.
      s (float): Current arclength.
      phi (float): Outgoing angle against the tangent at s.
      tolerances (Tolerances, optional): Root-finding tolerance.

  Returns:
      tuple[float, float, float]: Next arclength (s' > s), next angle and the
        chord length.

  Raises:
      EscapedWall: If the ray leaves an open block.
  """
  origin = curve.point(s)
  heading = float(curve.tangent_angle(s)) + phi
  direction = functions.unit_vector(heading)

  def side(sigma: float) -> float:
    return float(functions.cross2(direction, curve.point(s + sigma) - origin))

  scale = max(1.0, curve.length)
  if curve.closed:
    limit = curve.length * (1.0 - 1e-9)
  else:
    limit = curve.length - s
    if limit <= 0.0:
      raise exceptions.EscapedWall(s, origin, phi)
    end_side = side(limit)
    if end_side < -ENDPOINT_SIDE_TOL * scale:
      raise exceptions.EscapedWall(s, origin, phi)

  if not curve.closed and end_side <= ENDPOINT_SIDE_TOL * scale:
    s_next = curve.length
  else:
    kappa = float(curve.kappa(s))
    guess = 2.0 * min(phi, math.pi - phi, 1.0) / max(kappa, 1e-300)
    lo, hi = _bracket_chord(side, guess, limit)
    sigma = optimize.brentq(side,
                            lo,
                            hi,
                            xtol=tolerances.root_rel * curve.length,
                            maxiter=200)
    s_next = s + sigma

  landing = curve.point(s_next)
  chord = float(np.hypot(*(landing - origin)))
  phi_next = float(curve.tangent_angle(s_next)) - heading
  return s_next, phi_next, chord


def next_bounce(curve: protocols.BoundaryCurve,
                state: PhaseState,
                tolerances: Tolerances = DEFAULT_TOLERANCES) -> PhaseState:
  """
  Apply the billiard map once.

  The next bounce is the unique forward intersection of the outgoing ray
  with the boundary, found by bracketed root finding on the signed cross
  product of the ray direction with gamma(s') - gamma(s).

  Args:
      curve (BoundaryCurve): A table or an open block.
      state (PhaseState): The current bounce.
      tolerances (Tolerances, optional): Root-finding tolerance.

  Returns:
      PhaseState: The next bounce (arclength reduced mod l0 on tables).

  Raises:
      EscapedWall: If the ray leaves an open block.
  """
  s_next, phi_next, _ = advance(curve, state.s, state.phi, tolerances)
  if curve.closed:
    s_next = math.fmod(s_next, curve.length)
  return PhaseState(s_next, phi_next)


def shoot_wall(block: BuildingBlock,
               theta: float,
               tolerances: Tolerances = DEFAULT_TOLERANCES) -> WallShot:
  """
  Launch a ball from the start of a block and follow it until it escapes.

  Args:
      block (BuildingBlock): The open block.
      theta (float): Launch angle against the start tangent, in (0, pi/2).
      tolerances (Tolerances, optional): Root tolerance and bounce cap.

  Returns:
      WallShot: The bounces and the escape data.

  Raises:
      IterationCap: If more than `tolerances.max_bounces` bounces occur.
  """
  if not 0.0 < theta < 0.5 * math.pi:
    raise exceptions.PreconditionError(f'theta {theta!r} outside (0, pi/2)')
  s, phi = 0.0, theta
  bounces: list[float] = []
  angles: list[float] = []
  while True:
    try:
      s, phi, _ = advance(block, s, phi, tolerances)
    except exceptions.EscapedWall as escape:
      return WallShot(tuple(bounces), tuple(angles), len(bounces),
                      escape.exit_angle, escape.exit_arclength)
    bounces.append(s)
    angles.append(phi)
    if len(bounces) > tolerances.max_bounces:
      raise exceptions.IterationCap(
          f'more than {tolerances.max_bounces} bounces at theta={theta!r}')


def half_wall_count(shot: WallShot, length: float) -> int:
  """Number of bounces strictly before the block midpoint."""
  return int(np.count_nonzero(np.asarray(shot.bounces) < 0.5 * length))


def is_match(block: BuildingBlock,
             theta: float,
             tol: float | None = None,
             tolerances: Tolerances = DEFAULT_TOLERANCES) -> MatchResult:
  """
  Check whether a shot at angle theta bounces on the block midpoint.

  Args:
      block (BuildingBlock): The block.
      theta (float): Launch angle in (0, pi/2).
      tol (float | None, optional): Midpoint tolerance; defaults to
        `tolerances.match_rel` times the block length.
      tolerances (Tolerances, optional): Tolerance set.

  Returns:
      MatchResult: (matched, p, residual) where p is the 1-based index of the
        bounce nearest to the midpoint.
  """
  if tol is None:
    tol = tolerances.match_rel * block.length
  shot = shoot_wall(block, theta, tolerances)
  if not shot.bounces:
    return MatchResult(False, 0, 0.5 * block.length)
  gaps = np.abs(np.asarray(shot.bounces) - 0.5 * block.length)
  nearest = int(np.argmin(gaps))
  residual = float(gaps[nearest])
  matched = residual <= tol
  if matched:
    exit_gap = abs(shot.exit_arclength - block.length)
    angle_gap = abs(shot.exit_angle - theta)
    if exit_gap > EXIT_CHECK_TOL * block.length or angle_gap > EXIT_CHECK_TOL:
      logger.warning(
          'matched shot at theta=%.17g leaves asymmetrically '
          '(exit gap %.2e, angle gap %.2e)', theta, exit_gap, angle_gap)
  return MatchResult(matched, nearest + 1, residual)


def reflection_residuals(curve: protocols.BoundaryCurve,
                         arclengths: np.ndarray,
                         closed: bool = True) -> np.ndarray:
  """
  Reflection-law defect at each bounce, computed from the chords.

  At bounce i the angle from the incoming chord to the tangent must equal
  the angle from the tangent to the outgoing chord.

  Args:
      curve (BoundaryCurve): The boundary.
      arclengths (np.ndarray): Bounce arclengths in order.
      closed (bool, optional): Treat the sequence as cyclic. Defaults to True.

  Returns:
      np.ndarray: |angle_in - angle_out| for each bounce that has both an
        incoming and an outgoing chord.
  """
  s = np.asarray(arclengths, dtype=float)
  points = curve.point(s)
  tangents = functions.unit_vector(np.asarray(curve.tangent_angle(s)))
  if closed:
    incoming = points - np.roll(points, 1, axis=0)
    outgoing = np.roll(points, -1, axis=0) - points
  else:
    incoming = points[1:-1] - points[:-2]
    outgoing = points[2:] - points[1:-1]
    tangents = tangents[1:-1]
  angle_in = np.arctan2(functions.cross2(incoming, tangents),
                        np.einsum('ij,ij->i', incoming, tangents))
  angle_out = np.arctan2(functions.cross2(tangents, outgoing),
                         np.einsum('ij,ij->i', tangents, outgoing))
  return np.abs(angle_in - angle_out)


def closed_orbit_from_match(
    table: BilliardTable,
    theta: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES) -> Orbit:
  """
  Follow the orbit launched from the start of the first block at angle theta
  until it returns to the start.

  When theta matches every block, the ball leaves each block through its
  far end with angle theta, so the orbit closes after one turn.

  Args:
      table (BilliardTable): The table.
      theta (float): Launch angle, matching every block.
      tolerances (Tolerances, optional): Closure tolerance and bounce cap.

  Returns:
      Orbit: The closed orbit; its period is the number of chords.

  Raises:
      ClosureFailure: If the orbit misses the start point or angle.
  """
  length = table.length
  stop = length * (1.0 - ORBIT_STOP_FRACTION)
  s, phi = 0.0, theta
  states = [PhaseState(0.0, theta)]
  arclengths = [0.0]
  chords: list[float] = []
  while True:
    s, phi, chord = advance(table, s, phi, tolerances)
    chords.append(chord)
    if s >= stop:
      break
    states.append(PhaseState(math.fmod(s, length), phi))
    arclengths.append(s)
    if len(chords) > tolerances.max_bounces:
      raise exceptions.IterationCap(
          f'orbit at theta={theta!r} exceeded {tolerances.max_bounces} bounces')
  residual = max(abs(s - length), abs(phi - theta))
  if residual > tolerances.orbit_closure:
    raise exceptions.ClosureFailure(theta, residual)
  logger.debug('closed orbit at theta=%.6g: period %d, residual %.2e', theta,
               len(chords), residual)
  return Orbit(tuple(states), tuple(chords), math.fsum(chords), True,
               len(chords), residual, np.asarray(arclengths))


def time_reversed(curve: protocols.BoundaryCurve,
                  orbit: Orbit,
                  tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
  """
  Bounce arclengths obtained by iterating backwards from the orbit start.

  The state (s, phi) is mapped to (s, pi - phi) and the billiard map applied
  `orbit.period` times.

  Returns:
      np.ndarray: Arclengths mod l0 in the order they are visited.
  """
  first = orbit.states[0]
  s, phi = first.s, math.pi - first.phi
  visited = [math.fmod(s, curve.length)]
  for _ in range(orbit.period - 1):
    s, phi, _ = advance(curve, s, phi, tolerances)
    visited.append(math.fmod(s, curve.length))
  return np.asarray(visited)
