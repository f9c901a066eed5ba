"""Ready-made blocks and tables used by tests, docs and the CLI."""
import math
from typing import Sequence

import numpy as np

from billiardlib.kernel.block import BuildingBlock, circle_block
from billiardlib.kernel.profile import Bump, CurvatureProfile, bump_mass
from billiardlib.kernel.table import BilliardTable, close_table

# (centre fraction, halfwidth fraction, amplitude / base)
BumpSpec = tuple[float, float, float]

OVAL_BUMPS_A: tuple[BumpSpec, ...] = ((0.5, 0.3, 0.6),)
OVAL_BUMPS_B: tuple[BumpSpec, ...] = ((0.5, 0.35, -0.35),)


def symmetric_block(base: float, turning: float,
                    bumps: Sequence[BumpSpec]) -> BuildingBlock:
  """
  A symmetric block with prescribed total turning.

  Bump positions and widths are fractions of the block length, so the total
  turning is linear in the length and can be met exactly. Off-centre bumps
  get a mirror image.

  Args:
      base (float): Base curvature.
      turning (float): Total turning of the block, in (0, pi).
      bumps (Sequence[BumpSpec]): (centre fraction, halfwidth fraction,
        amplitude relative to base); centre fractions <= 0.5.

  Returns:
      BuildingBlock: The block.
  """
  per_length = base
  for centre, width, amplitude in bumps:
    copies = 1 if math.isclose(centre, 0.5) else 2
    per_length += copies * amplitude * base * width * bump_mass()
  length = turning / per_length
  placed: list[Bump] = []
  for centre, width, amplitude in bumps:
    bump = Bump(length * centre, length * width, amplitude * base)
    if math.isclose(centre, 0.5):
      placed.append(Bump(0.5 * length, length * width, amplitude * base))
    else:
      placed.extend([bump, bump.mirrored(length)])
  return BuildingBlock(CurvatureProfile(base, tuple(placed), length))


def unit_circle_blocks(n: int = 4) -> list[BuildingBlock]:
  return [circle_block(2 * math.pi / n) for _ in range(n)]


def unit_circle_table(n: int = 4) -> BilliardTable:
  return close_table(unit_circle_blocks(n))


def oval_blocks() -> list[BuildingBlock]:
  """Two quarter-turn blocks A, B with different central bumps."""
  quarter = 0.5 * math.pi
  return [
      symmetric_block(1.0, quarter, OVAL_BUMPS_A),
      symmetric_block(1.0, quarter, OVAL_BUMPS_B)
  ]


def oval_table(perimeter: float | None = None) -> BilliardTable:
  """
  A smooth oval glued as A, B, A, B from quarter-turn blocks.

  Opposite blocks are equal, so the chain closes for any pair of
  quarter-turn blocks. Optionally scaled to a given perimeter.
  """
  first, second = oval_blocks()
  table = close_table([first, second, first, second])
  if perimeter is None:
    return table
  return table.scaled(perimeter / table.length)


def random_symmetric_block(rng: np.random.Generator,
                           turning: float | None = None,
                           max_pairs: int = 3) -> BuildingBlock:
  """A block with random mirrored bump pairs and a mild curvature range."""
  if turning is None:
    turning = float(rng.uniform(0.3, 2.5))
  specs: list[BumpSpec] = []
  for _ in range(int(rng.integers(1, max_pairs + 1))):
    width = float(rng.uniform(0.03, 0.12))
    centre = float(rng.uniform(width + 0.02, 0.5 - 0.01))
    if centre + width >= 0.5:
      centre = 0.5
    specs.append((centre, width, float(rng.uniform(-0.25, 0.4))))
  return symmetric_block(float(rng.uniform(0.5, 2.0)), turning, specs)


def random_quarter_table(rng: np.random.Generator) -> BilliardTable:
  """An A, B, A, B table from two random quarter-turn blocks."""
  first = random_symmetric_block(rng, 0.5 * math.pi)
  second = random_symmetric_block(rng, 0.5 * math.pi)
  # equal bases keep the curvature continuous across the joints
  second = second.scaled(second.base / first.base)
  return close_table([first, second, first, second])
