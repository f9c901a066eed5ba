"""Empirical checks of how glancing orbits move in Lazutkin coordinates."""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from scipy import stats

from billiardlib.common import common
from billiardlib.dynamics.billiard import advance, shoot_wall
from billiardlib.kernel.block import BuildingBlock
from billiardlib.kernel.table import BilliardTable
from billiardlib.lazutkin.chart import (LazutkinChart, build_chart,
                                        lazutkin_perimeter)
from billiardlib.structures import exceptions
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances
from billiardlib.structures.table_schema import EstimateSchema

logger = logging.getLogger(__name__)

GLANCING_LIMIT = 0.05
NOISE_FLOOR = 1e-9


@dataclass(frozen=True)
class GlancingEstimates:
  """
  Result of the glancing-orbit harness.

  Attributes:
      e_y (float): Fitted slope of log D_y against log N (+inf when y is
        conserved to the noise floor).
      e_x (float): Fitted slope of log D_x against log N.
      table (pd.DataFrame): One row per y0 with N, D_y and D_x.
      trend_tau (float): Kendall tau of D_y(N) N^3 against N.
      trend_pvalue (float): Two-sided p-value of `trend_tau`.
  """
  e_y: float
  e_x: float
  table: pd.DataFrame
  trend_tau: float
  trend_pvalue: float


def _slope(counts: np.ndarray, drifts: np.ndarray) -> float:
  usable = drifts > NOISE_FLOOR
  if np.count_nonzero(usable) < 2:
    return math.inf
  slope, _ = np.polyfit(np.log(counts[usable]), np.log(drifts[usable]), 1)
  return float(slope)


def glancing_drift(table: BilliardTable,
                   y0: float,
                   chart: LazutkinChart,
                   tolerances: Tolerances = DEFAULT_TOLERANCES
                  ) -> tuple[int, float, float]:
  """
  Follow N = ceil(1 / y0) bounces from s = 0 and measure the drift of y and
  of the lifted x from the uniform advance x0 + k y0.

  Returns:
      tuple[int, float, float]: N, D_y(N) and D_x(N).
  """
  count = math.ceil(1.0 / y0)
  c_omega = chart.c_omega
  kappa0 = float(table.kappa(0.0))
  phi = 2.0 * math.asin(y0 * kappa0**(1.0 / 3.0) / (4.0 * c_omega))
  s = 0.0
  x0 = float(chart.x_of_s(0.0))
  drift_y = drift_x = 0.0
  for k in range(1, count + 1):
    s, phi, _ = advance(table, s, phi, tolerances)
    kappa = float(table.kappa(s))
    y = 4.0 * c_omega * kappa**(-1.0 / 3.0) * math.sin(0.5 * phi)
    x = float(chart.x_of_s(s))
    drift_y = max(drift_y, abs(y - y0))
    drift_x = max(drift_x, abs(x - x0 - k * y0))
  return count, drift_y, drift_x


def verify_glancing_estimates(
    table: BilliardTable,
    y0_list: Sequence[float],
    tolerances: Tolerances = DEFAULT_TOLERANCES) -> GlancingEstimates:
  """
  Fit the decay exponents of the Lazutkin drifts of glancing orbits.

  For each y0 the orbit starting at s = 0 is followed for N = ceil(1/y0)
  bounces; D_y(N) = max |y_k - y0| and D_x(N) = max |x_k - x0 - k y0|. The
  exponents are least-squares slopes of log D against log N, expected near
  -3 and -2.

  Args:
      table (BilliardTable): The table.
      y0_list (Sequence[float]): Initial y values, each in (0, 0.05].
      tolerances (Tolerances, optional): Dynamics tolerances.

  Returns:
      GlancingEstimates: Exponents, the per-y0 table and the trend check.
  """
  values = sorted(float(y) for y in y0_list)
  if not values or values[0] <= 0.0 or values[-1] > GLANCING_LIMIT:
    raise exceptions.PreconditionError(
        f'y0 values must lie in (0, {GLANCING_LIMIT}], got {y0_list!r}')
  chart = build_chart(table)
  rows = []
  for y0 in values:
    count, drift_y, drift_x = glancing_drift(table, y0, chart, tolerances)
    logger.debug('y0=%.3g: N=%d, D_y=%.3e, D_x=%.3e', y0, count, drift_y,
                 drift_x)
    rows.append((y0, count, drift_y, drift_x))

  frame = pd.DataFrame(rows,
                       columns=common.get_multiindex_multiple_columns([
                           EstimateSchema.Y0, EstimateSchema.N,
                           EstimateSchema.D_Y, EstimateSchema.D_X
                       ]))
  counts = frame[EstimateSchema.N].to_numpy(dtype=float)
  drift_y = frame[EstimateSchema.D_Y].to_numpy(dtype=float)
  drift_x = frame[EstimateSchema.D_X].to_numpy(dtype=float)
  if len(counts) >= 2 and np.ptp(drift_y * counts**3) > 0:
    trend = stats.kendalltau(counts, drift_y * counts**3)
    tau, pvalue = float(trend.statistic), float(trend.pvalue)
  else:
    tau, pvalue = 0.0, 1.0
  result = GlancingEstimates(_slope(counts, drift_y), _slope(counts, drift_x),
                             frame, tau, pvalue)
  logger.info('glancing estimates: e_y=%.3f, e_x=%.3f, tau=%.3f', result.e_y,
              result.e_x, tau)
  return result


@dataclass(frozen=True)
class BounceCountLaw:
  """
  Bounce count of a glancing wall shot against the Lazutkin perimeter.

  Attributes:
      bounces (int): Index k of the last bounce before escape.
      scaled_count (float): y0 * k.
      lazutkin_perimeter (float): int_0^a k^(2/3) ds of the block.
      relative_error (float): |y0 k - perimeter| / perimeter.
  """
  bounces: int
  scaled_count: float
  lazutkin_perimeter: float
  relative_error: float


def bounce_count_law(block: BuildingBlock,
                     y0: float,
                     tolerances: Tolerances = DEFAULT_TOLERANCES
                    ) -> BounceCountLaw:
  """
  Compare y0 * k with the block's Lazutkin perimeter.

  y0 is measured in the block's own chart with C = 1, so the launch angle is
  2 arcsin(y0 k(0)^(1/3) / 4) and y0 * k tends to int_0^a k^(2/3) as y0 -> 0.

  Args:
      block (BuildingBlock): The block.
      y0 (float): Glancing parameter, in (0, 0.05].
      tolerances (Tolerances, optional): Dynamics tolerances.

  Returns:
      BounceCountLaw: The counts and their relative error.
  """
  if not 0.0 < y0 <= GLANCING_LIMIT:
    raise exceptions.PreconditionError(
        f'y0 must lie in (0, {GLANCING_LIMIT}], got {y0!r}')
  kappa0 = float(block.kappa(0.0))
  theta = 2.0 * math.asin(y0 * kappa0**(1.0 / 3.0) / 4.0)
  shot = shoot_wall(block, theta, tolerances)
  perimeter = lazutkin_perimeter(block)
  scaled = y0 * shot.escape_index
  return BounceCountLaw(shot.escape_index, scaled, perimeter,
                        abs(scaled - perimeter) / perimeter)
