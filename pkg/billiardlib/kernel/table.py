"""Gluing building blocks into closed billiard tables."""
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import numpy.typing as npt
from scipy import optimize

from billiardlib.common import common
from billiardlib.kernel.block import BuildingBlock
from billiardlib.kernel.motion import RigidMotion
from billiardlib.kernel.profile import CurvatureProfile, GluedProfile
from billiardlib.structures import enums, exceptions, protocols
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

CONGRUENCE_SAMPLES = 2**14
CONGRUENCE_CANDIDATES = 8
CONGRUENCE_REFINED = 2

ProfileLike = BuildingBlock | CurvatureProfile | GluedProfile


def _as_profile(item: ProfileLike) -> CurvatureProfile | GluedProfile:
  return item.profile if isinstance(item, BuildingBlock) else item


def glue(first: ProfileLike,
         second: ProfileLike) -> tuple[protocols.ArcProfile, RigidMotion]:
  """
  Concatenate two arcs, the second moved to continue the first.

  Args:
      first (ProfileLike): The leading block or profile.
      second (ProfileLike): The trailing block or profile.

  Returns:
      tuple[ArcProfile, RigidMotion]: The profile on [0, a_1 + a_2] and the
        orientation-preserving isometry aligning the start point and tangent
        of `second` with the end of `first`.
  """
  head = _as_profile(first)
  tail = _as_profile(second)
  end = head.geometry.end_point
  motion = RigidMotion(head.turning, (end[0], end[1]))
  if (isinstance(head, CurvatureProfile) and
      isinstance(tail, CurvatureProfile) and head.base == tail.base):
    shifted = tuple(b.shifted(head.length) for b in tail.bumps)
    return CurvatureProfile(head.base, head.bumps + shifted,
                            head.length + tail.length), motion
  pieces: list[CurvatureProfile] = []
  for part in (head, tail):
    pieces.extend(part.pieces if isinstance(part, GluedProfile) else [part])
  return GluedProfile(tuple(pieces)), motion


@dataclass(frozen=True)
class BilliardTable:
  """
  A closed strictly convex boundary assembled from building blocks.

  Arclength runs from the start of the first block; points and the
  unwrapped tangent angle are defined for every real s, periodically with
  period `total_length`.

  Attributes:
      blocks (tuple[BuildingBlock, ...]): Blocks in gluing order.
      joints (np.ndarray): Arclength at which each block starts.
      placements (tuple[RigidMotion, ...]): Motion placing each block.
      total_length (float): Length l0 of the boundary.
  """
  blocks: tuple[BuildingBlock, ...]
  joints: np.ndarray = field(compare=False, repr=False)
  placements: tuple[RigidMotion, ...] = field(compare=False, repr=False)
  total_length: float = field(compare=False)

  @property
  def closed(self) -> bool:
    return True

  @property
  def length(self) -> float:
    return self.total_length

  @property
  def block_count(self) -> int:
    return len(self.blocks)

  def _locate(self, s: npt.ArrayLike) -> tuple[np.ndarray, ...]:
    s_arr = np.asarray(s, dtype=float)
    loops = np.floor(s_arr / self.total_length)
    wrapped = s_arr - loops * self.total_length
    idx = np.clip(
        np.searchsorted(self.joints, wrapped, side='right') - 1, 0,
        self.block_count - 1)
    local = wrapped - self.joints[idx]
    return s_arr, loops, idx, local

  def block_index(self, s: npt.ArrayLike) -> int | np.ndarray:
    idx = self._locate(s)[2]
    return int(idx) if np.ndim(s) == 0 else idx

  def _per_block(self, s: npt.ArrayLike, evaluate, width: int = 0):
    s_arr, loops, idx, local = self._locate(s)
    shape = s_arr.shape + ((width,) if width else ())
    values = np.zeros(shape)
    for k, block in enumerate(self.blocks):
      mask = idx == k
      if np.any(mask):
        clipped = np.clip(local[mask], 0.0, block.length)
        values[mask] = evaluate(k, block, clipped, loops[mask])
    return values

  def point(self, s: npt.ArrayLike) -> np.ndarray:
    return self._per_block(
        s, lambda k, b, u, _: self.placements[k].apply(b.point(u)), width=2)

  def tangent_angle(self, s: npt.ArrayLike) -> float | np.ndarray:
    values = self._per_block(
        s, lambda k, b, u, loops: np.asarray(b.tangent_angle(u)) + self.
        placements[k].rotation + 2 * math.pi * loops)
    return common.as_output(values, s)

  def kappa(self, s: npt.ArrayLike) -> float | np.ndarray:
    values = self._per_block(s, lambda k, b, u, _: b.kappa(u))
    return common.as_output(values, s)

  def kappa_prime(self, s: npt.ArrayLike) -> float | np.ndarray:
    values = self._per_block(s, lambda k, b, u, _: b.kappa_prime(u))
    return common.as_output(values, s)

  def breakpoints(self) -> np.ndarray:
    marks = [np.append(self.joints, self.total_length)]
    for offset, block in zip(self.joints, self.blocks):
      marks.append(block.profile.breakpoints() + offset)
    return np.unique(np.concatenate(marks))

  def block_lengths(self) -> np.ndarray:
    return np.array([b.length for b in self.blocks])

  def scaled(self, factor: float) -> 'BilliardTable':
    return close_table([b.scaled(factor) for b in self.blocks])


def close_table(blocks: Sequence[BuildingBlock],
                tolerances: Tolerances = DEFAULT_TOLERANCES) -> BilliardTable:
  """
  Glue blocks in order and check that the chain closes up.

  Args:
      blocks (Sequence[BuildingBlock]): Blocks in gluing order.
      tolerances (Tolerances, optional): Closure tolerance.

  Returns:
      BilliardTable: The closed table with joints and placements.

  Raises:
      ClosureError: If the turnings do not sum to 2*pi or the composed
        motions are not the identity.
  """
  blocks = tuple(blocks)
  if not blocks:
    raise exceptions.PreconditionError('a table needs at least one block')
  placements = [RigidMotion.identity()]
  for block in blocks:
    placements.append(placements[-1].compose(block.end_motion))
  turning_defect = math.fsum([b.turning for b in blocks]) - 2 * math.pi
  final = placements[-1]
  angle_gap, endpoint_gap = final.distance_from_identity()
  limit = tolerances.closure
  if abs(turning_defect) > limit or angle_gap > limit or endpoint_gap > limit:
    raise exceptions.ClosureError(turning_defect, endpoint_gap)
  lengths = [b.length for b in blocks]
  joints = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
  logger.debug('closed table of %d blocks, endpoint gap %.2e', len(blocks),
               endpoint_gap)
  return BilliardTable(blocks, joints, tuple(placements[:-1]),
                       math.fsum(lengths))


def _sample_kappa(table: BilliardTable, fractions: np.ndarray) -> np.ndarray:
  return np.asarray(table.kappa(table.length * fractions))


def congruence_distance(first: BilliardTable,
                        second: BilliardTable,
                        samples: int = CONGRUENCE_SAMPLES) -> float:
  """
  Sup distance between curvature profiles, minimised over start point and
  orientation.

  Curvature as a function of arclength determines a closed curve up to
  rigid motion, so the distance vanishes exactly for congruent tables.
  Candidate shifts come from an FFT correlation on a uniform grid and are
  refined by bounded scalar minimisation.

  Args:
      first (BilliardTable): Reference table.
      second (BilliardTable): Table compared against it.
      samples (int, optional): Grid size. Defaults to 2**14.

  Returns:
      float: The distance; for different total lengths, the larger of the
        length difference and the grid distance in normalised arclength.
  """
  fractions = np.arange(samples) / samples
  reference = _sample_kappa(first, fractions)
  other = _sample_kappa(second, fractions)
  ref_spectrum = np.fft.rfft(reference)
  other_spectrum = np.fft.rfft(other)

  def sup_distance(sign: int, shift: float) -> float:
    moved = np.mod(sign * fractions + shift, 1.0)
    return float(np.max(np.abs(reference - _sample_kappa(second, moved))))

  best = math.inf
  for orientation in enums.Orientation:
    sign = orientation.sign
    if sign > 0:
      correlation = np.fft.irfft(np.conj(ref_spectrum) * other_spectrum,
                                 n=samples)
    else:
      correlation = np.fft.irfft(ref_spectrum * other_spectrum, n=samples)
    candidates = np.argsort(-correlation)[:CONGRUENCE_CANDIDATES]
    scored = []
    for m in candidates:
      shifted = other[np.mod(sign * np.arange(samples) + m, samples)]
      scored.append((float(np.max(np.abs(reference - shifted))), int(m)))
    scored.sort()
    best = min(best, scored[0][0])
    for grid_distance, m in scored[:CONGRUENCE_REFINED]:
      if grid_distance == 0.0:
        continue
      result = optimize.minimize_scalar(
          lambda tau: sup_distance(sign, tau),
          bounds=((m - 1) / samples, (m + 1) / samples),
          method='bounded',
          options={'xatol': 1e-15})
      best = min(best, float(result.fun))

  length_gap = abs(first.length - second.length)
  if length_gap > 1e-12 * max(first.length, second.length):
    return max(length_gap, best)
  return best
