"""
Iterative construction of two non-congruent tables glued from the same
blocks in different orders.

Every round picks a smaller angle and perturbs each block away from the
bounce points of earlier rounds until the angle matches it, so the shot
from the block start bounces on the block midpoint. Any gluing order of
blocks matched at an angle carries a closed orbit at that angle with the
same period and perimeter.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from billiardlib.dynamics import billiard
from billiardlib.kernel.block import (BuildingBlock, BumpLayout, circle_block,
                                      linear_response, perturb_block,
                                      sup_curvature_change, DELTA_LIMIT)
from billiardlib.kernel.table import (BilliardTable, close_table,
                                      congruence_distance)
from billiardlib.structures import enums, exceptions
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

MIN_HALF_BOUNCES = 4
SUPPORT_MARGIN = 0.1
SNAP_BRACKET = 0.15
MAX_BRACKET_EXPANSIONS = 40
MAX_JUMP_SPLITS = 40
FINGERPRINT_SUPPORT = ((0.05, 0.15), (0.35, 0.45))


@dataclass(frozen=True)
class SchemeConfig:
  """
  Parameters of a construction run.

  Attributes:
      n (int): Number of blocks, at least 4.
      permutation (tuple[int, ...]): 1-based gluing order of the second table.
      rounds (int): Number M of matching rounds.
      epsilon (float): Global curvature budget; round m may change the
        curvature by at most epsilon / 2^m.
      theta_seed (float): Target of the first matched angle.
      seed (int): Seed of every random choice.
      sweep_points (int): Grid size of the delta sweep (odd, includes 0).
      min_support_fraction (float): Smallest support width, times a.
      fingerprint_scale (float): Fingerprint size relative to epsilon / 4.
      tolerances (Tolerances): Numerical tolerances.
  """
  n: int = 4
  permutation: tuple[int, ...] = (1, 3, 2, 4)
  rounds: int = 3
  epsilon: float = 0.02
  theta_seed: float = 0.1
  seed: int = 0
  sweep_points: int = 17
  min_support_fraction: float = 1.0 / 50.0
  fingerprint_scale: float = 1e-3
  tolerances: Tolerances = DEFAULT_TOLERANCES

  def __post_init__(self) -> None:
    object.__setattr__(self, 'permutation',
                       tuple(int(k) for k in self.permutation))
    if self.n < 4:
      raise exceptions.PreconditionError(f'need n >= 4 blocks, got {self.n}')
    if self.rounds < 1:
      raise exceptions.PreconditionError(
          f'need at least one round, got {self.rounds}')
    if not self.epsilon > 0.0:
      raise exceptions.PreconditionError(
          f'epsilon must be positive, got {self.epsilon}')
    if not 0.0 < self.theta_seed < 0.5 * math.pi:
      raise exceptions.PreconditionError(
          f'theta_seed {self.theta_seed} outside (0, pi/2)')
    if self.sweep_points < 3 or self.sweep_points % 2 == 0:
      raise exceptions.PreconditionError(
          f'sweep_points must be odd and >= 3, got {self.sweep_points}')
    form = permutation_form(self.permutation, self.n)
    if form is not None:
      raise exceptions.InvalidPermutation(self.permutation, form.value)

  def as_dict(self) -> dict:
    echo = dataclasses.asdict(self)
    echo['permutation'] = list(self.permutation)
    return echo


@dataclass(frozen=True)
class MatchCertificate:
  """
  Record of one block matched at one angle.

  Attributes:
      round (int): Round m, from 1.
      block_index (int): Block k, from 1.
      theta (float): The matched angle.
      delta_star (float): Free amplitude of the accepted perturbation.
      p (int): 1-based index of the midpoint bounce.
      residual (float): Distance of that bounce from a / 2.
      support (tuple[float, float]): Support of the perturbation.
      curvature_change (float): Sup change of the curvature in this round.
  """
  round: int
  block_index: int
  theta: float
  delta_star: float
  p: int
  residual: float
  support: tuple[float, float]
  curvature_change: float = 0.0


@dataclass
class SchemeResult:
  """
  Output of `run_scheme`.

  Attributes:
      table_a (BilliardTable): Blocks glued in natural order.
      table_b (BilliardTable): Blocks glued in the configured permutation.
      blocks (list[BuildingBlock]): The final blocks.
      certificates (list[MatchCertificate]): One per round and block.
      thetas (list[float]): Matched angles, decreasing.
      report (dict): Budgets, periods and the congruence distance.
  """
  table_a: BilliardTable
  table_b: BilliardTable
  blocks: list[BuildingBlock]
  certificates: list[MatchCertificate]
  thetas: list[float]
  report: dict = field(default_factory=dict)


def init_circle_blocks(n: int) -> list[BuildingBlock]:
  """n unit-curvature arcs of length 2 pi / n."""
  if n < 4:
    raise exceptions.PreconditionError(f'need n >= 4 blocks, got {n}')
  return [circle_block(2.0 * math.pi / n) for _ in range(n)]


def permutation_form(perm: Sequence[int],
                     n: int) -> enums.PermutationForm | None:
  """
  The trivial form a permutation has, if any.

  Args:
      perm (Sequence[int]): 1-based permutation of {1..n}.
      n (int): Number of blocks.

  Returns:
      PermutationForm | None: ROTATION for k_l = l + c, REFLECTION for
        k_l = c - l (mod n), None for a permutation producing a new table.

  Raises:
      InvalidPermutation: If `perm` is not a bijection of {1..n}.
  """
  perm = tuple(int(k) for k in perm)
  if sorted(perm) != list(range(1, n + 1)):
    raise exceptions.InvalidPermutation(perm, 'not a bijection')
  places = np.arange(1, n + 1)
  values = np.asarray(perm)
  if len(set(np.mod(values - places, n))) == 1:
    return enums.PermutationForm.ROTATION
  if len(set(np.mod(values + places, n))) == 1:
    return enums.PermutationForm.REFLECTION
  return None


def valid_permutation(perm: Sequence[int], n: int) -> bool:
  return permutation_form(perm, n) is None


def fingerprint_perturb(blocks: Sequence[BuildingBlock],
                        epsilon: float,
                        seed: int = 0,
                        scale: float = 1e-3,
                        tolerances: Tolerances = DEFAULT_TOLERANCES
                       ) -> list[BuildingBlock]:
  """
  Make the blocks pairwise distinct with tiny closure-preserving bumps.

  Block k gets a random layout and support from `default_rng([seed, 0, k])`
  and a curvature change of size epsilon / 4 * scale.

  Args:
      blocks (Sequence[BuildingBlock]): Blocks to mark.
      epsilon (float): Global budget; 0 leaves the blocks unchanged.
      seed (int, optional): Random seed. Defaults to 0.
      scale (float, optional): Size relative to epsilon / 4.
      tolerances (Tolerances, optional): Perturbation tolerances.

  Returns:
      list[BuildingBlock]: The marked blocks.
  """
  if epsilon == 0.0:
    return list(blocks)
  marked = []
  for k, block in enumerate(blocks, start=1):
    rng = np.random.default_rng([seed, 0, k])
    layout = BumpLayout.random(rng)
    lo = block.length * float(rng.uniform(*FINGERPRINT_SUPPORT[0]))
    hi = block.length * float(rng.uniform(*FINGERPRINT_SUPPORT[1]))
    sign = 1.0 if rng.random() < 0.5 else -1.0
    _, response = linear_response(block, (lo, hi), layout)
    delta = sign * 0.25 * epsilon * scale / response
    marked.append(perturb_block(block, (lo, hi), layout, delta, tolerances))
    logger.debug('fingerprint of block %d: support [%.6g, %.6g], delta %.3e',
                 k, lo, hi, delta)
  return marked


def _midpoint_bounce(block: BuildingBlock, theta: float, p: int,
                     tolerances: Tolerances) -> float:
  """Arclength of bounce p, or a when the shot has fewer bounces."""
  shot = billiard.shoot_wall(block, theta, tolerances)
  if len(shot.bounces) < p:
    return block.length
  return shot.bounces[p - 1]


def matching_angle(block: BuildingBlock,
                   p: int,
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
  """
  The angle whose p-th bounce hits the block midpoint.

  Bounce p moves forward as the angle grows, so the root is bracketed around
  the circle value turning / (4p) and refined with Brent's method.

  Raises:
      NoConvergence: If no bracket is found.
  """
  half = 0.5 * block.length
  guess = block.turning / (4.0 * p)

  def offset(theta: float) -> float:
    return _midpoint_bounce(block, theta, p, tolerances) - half

  lo, hi = guess * (1.0 - SNAP_BRACKET), guess * (1.0 + SNAP_BRACKET)
  for _ in range(MAX_BRACKET_EXPANSIONS):
    if offset(lo) < 0.0 < offset(hi):
      return optimize.brentq(offset, lo, hi, xtol=1e-16, rtol=1e-15)
    lo *= 1.0 - SNAP_BRACKET
    hi = min(hi * (1.0 + SNAP_BRACKET), 0.5 * block.turning)
  raise exceptions.NoConvergence(
      f'no bracket for the matching angle of bounce {p}')


def choose_matching_angle(blocks: Sequence[BuildingBlock],
                          target: float,
                          below: float = math.inf,
                          tolerances: Tolerances = DEFAULT_TOLERANCES
                         ) -> tuple[float, int]:
  """
  Snap a target angle to one that nearly matches every block.

  p is chosen from the target (at least 4, so every block sees at least 8
  bounces) and the angle is the median of the blocks' own matching angles
  at that p. p grows until the angle is strictly below `below`.

  Returns:
      tuple[float, int]: The angle and its midpoint bounce index p.
  """
  turning = float(np.median([b.turning for b in blocks]))
  p = max(MIN_HALF_BOUNCES, round(turning / (4.0 * target)))
  while True:
    angles = [matching_angle(b, p, tolerances) for b in blocks]
    theta = float(np.median(angles))
    if theta < below:
      logger.info('snapped angle %.17g (p=%d, spread %.2e)', theta, p,
                  max(angles) - min(angles))
      return theta, p
    p += 1


def candidate_supports(length: float,
                       recorded: Sequence[float],
                       min_width: float) -> list[tuple[float, float]]:
  """
  Support intervals in (0, a/2) avoiding every recorded bounce.

  Gaps between consecutive points of {0, recorded, a/2} are shrunk by 10%
  on each side; gaps narrower than `min_width` after shrinking are dropped.

  Returns:
      list[tuple[float, float]]: Intervals ordered widest first.

  Raises:
      SupportExhausted: If no interval is wide enough.
  """
  half = 0.5 * length
  marks = np.unique(
      np.concatenate([[0.0, half],
                      [r for r in recorded if 0.0 < r < half]]))
  candidates = []
  for left, right in zip(marks[:-1], marks[1:]):
    margin = SUPPORT_MARGIN * (right - left)
    lo, hi = float(left + margin), float(right - margin)
    if hi - lo >= min_width:
      candidates.append((lo, hi))
  if not candidates:
    raise exceptions.SupportExhausted(
        f'no support of width {min_width:.3g} avoids {len(marks) - 2} '
        'recorded bounces')
  return sorted(candidates, key=lambda c: c[0] - c[1])


def _sweep_jumps(counts: dict[float, int]) -> list[tuple[float, float]]:
  grid = sorted(counts)
  jumps = [(d1, d2)
           for d1, d2 in zip(grid[:-1], grid[1:])
           if counts[d1] != counts[d2]]
  return sorted(jumps, key=lambda j: abs(j[0] + j[1]))


def match_angle_to_block(block: BuildingBlock,
                         theta: float,
                         support: tuple[float, float],
                         budget: float,
                         layout: BumpLayout | None = None,
                         sweep_points: int = 17,
                         tolerances: Tolerances = DEFAULT_TOLERANCES
                        ) -> tuple[BuildingBlock, MatchCertificate]:
  """
  Perturb a block on `support` until the angle theta matches it.

  The number of bounces before the midpoint is tracked over a delta grid in
  [-d, d], where d keeps the curvature change within `budget`. Every jump of
  that count is a bounce crossing a/2; Brent's method on the position of the
  crossing bounce locates the midpoint hit. Jumps nearest delta = 0 are
  tried first.

  Args:
      block (BuildingBlock): The block.
      theta (float): Angle to match.
      support (tuple[float, float]): Support inside (0, a/2).
      budget (float): Largest allowed sup change of the curvature.
      layout (BumpLayout | None, optional): Bump placement. Defaults to the
        standard layout.
      sweep_points (int, optional): Size of the delta grid.
      tolerances (Tolerances, optional): Matching tolerance and others.

  Returns:
      tuple[BuildingBlock, MatchCertificate]: The matched block and its
        certificate (round and block index left at 0).

  Raises:
      NoDiscontinuity: If the count is constant over the sweep.
      NoOddJump: If no jump ends in a midpoint hit.
  """
  layout = layout or BumpLayout()
  support = (float(support[0]), float(support[1]))
  tol = tolerances.match_rel * block.length
  half = 0.5 * block.length

  matched, p, residual = billiard.is_match(block, theta, tol, tolerances)
  if matched:
    return block, MatchCertificate(0, 0, theta, 0.0, p, residual, support)

  _, response = linear_response(block, support, layout)
  reach = min(budget / response, DELTA_LIMIT)
  shots: dict[float, billiard.WallShot] = {}

  def shot_at(delta: float) -> billiard.WallShot:
    if delta not in shots:
      candidate = perturb_block(block, support, layout, delta, tolerances)
      shots[delta] = billiard.shoot_wall(candidate, theta, tolerances)
    return shots[delta]

  def count_at(delta: float) -> int:
    return billiard.half_wall_count(shot_at(delta), block.length)

  counts = {
      float(d): count_at(float(d))
      for d in np.linspace(-reach, reach, sweep_points)
  }
  logger.debug('sweep over +-%.3e: counts %s', reach, sorted(set(
      counts.values())))
  jumps = _sweep_jumps(counts)
  if not jumps:
    raise exceptions.NoDiscontinuity(
        f'bounce count constant over |delta| <= {reach:.3e} at '
        f'theta={theta!r}')

  pending = list(jumps)
  splits = 0
  while pending:
    lo, hi = pending.pop(0)
    c_lo, c_hi = count_at(lo), count_at(hi)
    if abs(c_lo - c_hi) > 1 and splits < MAX_JUMP_SPLITS:
      splits += 1
      middle = 0.5 * (lo + hi)
      pending[:0] = [(a, b) for a, b in ((lo, middle), (middle, hi))
                     if count_at(a) != count_at(b)]
      continue
    j = max(c_lo, c_hi)

    def crossing(delta: float) -> float:
      bounces = shot_at(delta).bounces
      return (bounces[j - 1] if len(bounces) >= j else block.length) - half

    try:
      delta_star = optimize.brentq(crossing, lo, hi, xtol=1e-16, rtol=1e-15)
    except ValueError:
      continue
    candidate = perturb_block(block, support, layout, delta_star, tolerances)
    matched, p, residual = billiard.is_match(candidate, theta, tol, tolerances)
    if matched:
      change = sup_curvature_change(block, candidate)
      logger.debug('matched at delta %.6e: p=%d, residual %.2e', delta_star,
                   p, residual)
      return candidate, MatchCertificate(0, 0, theta, float(delta_star), p,
                                         residual, support, change)
    logger.debug('jump at [%.6e, %.6e] has no midpoint hit (residual %.2e)',
                 lo, hi, residual)
  raise exceptions.NoOddJump(
      f'none of {len(jumps)} jumps hits the midpoint at theta={theta!r}')


def _recorded_bounces(block: BuildingBlock, thetas: Sequence[float],
                      tolerances: Tolerances) -> list[float]:
  recorded: list[float] = []
  for theta in thetas:
    recorded.extend(billiard.shoot_wall(block, theta, tolerances).bounces)
  return recorded


def _match_with_fallback(block: BuildingBlock, theta: float, budget: float,
                         recorded: list[float], layout: BumpLayout,
                         config: SchemeConfig, block_index: int
                        ) -> tuple[BuildingBlock, MatchCertificate]:
  supports = candidate_supports(block.length, recorded,
                                config.min_support_fraction * block.length)
  failure: exceptions.BilliardLibError | None = None
  for attempt, support in enumerate(supports):
    if attempt:
      logger.warning('block %d: retrying with support [%.6g, %.6g] (%s)',
                     block_index, *support, failure)
    try:
      return match_angle_to_block(block, theta, support, budget, layout,
                                  config.sweep_points, config.tolerances)
    except (exceptions.NoDiscontinuity, exceptions.NoOddJump) as error:
      failure = error
  assert failure is not None
  raise failure


def _verify_matches(blocks: Sequence[BuildingBlock], thetas: Sequence[float],
                    tolerances: Tolerances) -> None:
  for theta in thetas:
    for block in blocks:
      tol = tolerances.reverify_rel * block.length
      matched, _, residual = billiard.is_match(block, theta, tol, tolerances)
      if not matched:
        raise exceptions.ClosureFailure(theta, residual)


def run_scheme(config: SchemeConfig) -> SchemeResult:
  """
  Run the matching scheme and glue the two tables.

  Args:
      config (SchemeConfig): Run parameters.

  Returns:
      SchemeResult: The tables, blocks, certificates and matched angles.

  Raises:
      ClosureFailure: If an earlier match does not survive later rounds.
      CongruentPairError: If the two tables turn out congruent.
      SupportExhausted: If a block has no room left for a support.
  """
  tolerances = config.tolerances
  blocks = fingerprint_perturb(init_circle_blocks(config.n), config.epsilon,
                               config.seed, config.fingerprint_scale,
                               tolerances)
  thetas: list[float] = []
  certificates: list[MatchCertificate] = []
  budgets: list[float] = []
  target, previous = config.theta_seed, math.inf

  for round_index in range(1, config.rounds + 1):
    budget = config.epsilon / 2**round_index
    theta, p = choose_matching_angle(blocks, target, previous, tolerances)
    logger.info('round %d: theta=%.17g, p=%d, budget %.3e', round_index,
                theta, p, budget)
    for k, block in enumerate(blocks, start=1):
      recorded = _recorded_bounces(block, thetas, tolerances)
      layout = BumpLayout.random(
          np.random.default_rng([config.seed, round_index, k]))
      matched, certificate = _match_with_fallback(block, theta, budget,
                                                  recorded, layout, config, k)
      blocks[k - 1] = matched
      certificates.append(
          dataclasses.replace(certificate, round=round_index, block_index=k))
      logger.info('round %d block %d matched: delta*=%.6e, p=%d',
                  round_index, k, certificate.delta_star, certificate.p)
    thetas.append(theta)
    budgets.append(budget)
    previous, target = theta, 0.5 * theta

  _verify_matches(blocks, thetas, tolerances)
  table_a = close_table(blocks, tolerances)
  table_b = close_table([blocks[k - 1] for k in config.permutation],
                        tolerances)
  distance = congruence_distance(table_a, table_b)
  if distance < tolerances.non_congruence:
    raise exceptions.CongruentPairError(distance, tolerances.non_congruence)
  periods = [
      sum(2 * c.p for c in certificates if c.round == m)
      for m in range(1, config.rounds + 1)
  ]
  logger.info('tables closed: congruence distance %.3e, periods %s', distance,
              periods)
  report = {
      'budgets': budgets,
      'periods': periods,
      'congruence_distance': distance,
  }
  return SchemeResult(table_a, table_b, blocks, certificates, thetas, report)
