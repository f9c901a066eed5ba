"""
Length-spectrum invariants of a table.

Two independent routes are kept: quadrature of the closed-form integrals in
the curvature, and a weighted fit of the large-n expansion of the maximal
n-gon perimeters L_n ~ l0 + c_1 / n^2 + c_2 / n^4 + ...
"""
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from scipy import integrate

from billiardlib.common import common
from billiardlib.dynamics.billiard import closed_orbit_from_match
from billiardlib.dynamics.ngon import max_perimeter_ngon
from billiardlib.kernel.block import BuildingBlock
from billiardlib.kernel.table import BilliardTable, congruence_distance
from billiardlib.lazutkin.chart import build_chart
from billiardlib.structures import exceptions
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances
from billiardlib.structures.table_schema import GapSchema, NgonSchema

logger = logging.getLogger(__name__)

DEFAULT_N_GRID = (16, 24, 32, 48, 64, 96, 128, 192, 256)
DEFAULT_ORDER = 3
QUAD_TOL = 1e-13


def _block_integral(block: BuildingBlock, integrand) -> float:
  edges = block.profile.breakpoints()
  pieces = []
  for left, right in zip(edges[:-1], edges[1:]):
    value, _ = integrate.quad(integrand,
                              left,
                              right,
                              epsabs=QUAD_TOL * (right - left),
                              epsrel=QUAD_TOL,
                              limit=200)
    pieces.append(value)
  return math.fsum(pieces)


@functools.lru_cache(maxsize=256)
def block_invariants(block: BuildingBlock) -> tuple[float, float, float]:
  """
  Contribution of one block to (l0, l1, l2).

  With radius of curvature r = 1/k, l1 = -2 int r^(2/3) and
  l2 = 1/1080 int (9 r^(4/3) + 8 r^(-8/3) r'^2), where r' = -k'/k^2.
  """

  def first(s: float) -> float:
    return -2.0 * float(block.kappa(s))**(-2.0 / 3.0)

  def second(s: float) -> float:
    kappa = float(block.kappa(s))
    slope = float(block.kappa_prime(s))
    return kappa**(-4.0 / 3.0) * (9.0 + 8.0 * slope**2) / 1080.0

  return (block.length, _block_integral(block, first),
          _block_integral(block, second))


def mm_quadrature(table: BilliardTable) -> tuple[float, float, float]:
  """
  Quadrature values of (l0, l1, l2) for a table.

  Integrals are computed block by block and summed with `math.fsum`, which
  is exactly rounded and therefore independent of the block order.

  Args:
      table (BilliardTable): The table.

  Returns:
      tuple[float, float, float]: ell0, ell1_quad, ell2_quad.
  """
  parts = [block_invariants(block) for block in table.blocks]
  return tuple(math.fsum(p[i] for p in parts) for i in range(3))


@dataclass(frozen=True)
class ExpansionFit:
  """
  Fitted coefficients of L_n ~ ell0 + sum_k c_k / n^(2k).

  Attributes:
      ell0 (float): Constant term.
      coefficients (tuple[float, ...]): c_1, ..., c_K.
      residual (float): Root mean square of L_n minus the fitted model.
      condition (float): Condition number of the normal system.
  """
  ell0: float
  coefficients: tuple[float, ...]
  residual: float
  condition: float

  def evaluate(self, n: float | np.ndarray) -> float | np.ndarray:
    n_arr = np.asarray(n, dtype=float)
    values = np.full(n_arr.shape, self.ell0)
    for k, c in enumerate(self.coefficients, start=1):
      values = values + c * n_arr**(-2 * k)
    return common.as_output(values, n)


def fit_expansion(samples: Iterable[tuple[int, float]],
                  order: int = DEFAULT_ORDER,
                  tolerances: Tolerances = DEFAULT_TOLERANCES) -> ExpansionFit:
  """
  Weighted least-squares fit of the even expansion of L_n.

  The basis is (n_min / n)^(2j), j = 0..K, with row weights n^4 and unit
  column norms; coefficients are mapped back to powers of 1/n afterwards.

  Args:
      samples (Iterable[tuple[int, float]]): (n, L_n) pairs.
      order (int, optional): Number K of fitted coefficients. Defaults to 3.
      tolerances (Tolerances, optional): Conditioning limit.

  Returns:
      ExpansionFit: The fit.

  Raises:
      PreconditionError: With fewer than K + 3 distinct n or an n range
        narrower than one octave.
      IllConditioned: If the normal system is too badly conditioned.
  """
  pairs = sorted({int(n): float(value) for n, value in samples}.items())
  if len(pairs) < order + 3:
    raise exceptions.PreconditionError(
        f'expansion of order {order} needs {order + 3} distinct n, '
        f'got {len(pairs)}')
  n = np.array([p[0] for p in pairs], dtype=float)
  values = np.array([p[1] for p in pairs])
  if n[-1] < 2 * n[0]:
    raise exceptions.PreconditionError(
        f'n range [{n[0]:g}, {n[-1]:g}] spans less than one octave')

  t = (n[0] / n)**2
  design = np.vander(t, order + 1, increasing=True)
  sqrt_weights = n**2
  weighted = design * sqrt_weights[:, None]
  norms = np.linalg.norm(weighted, axis=0)
  scaled = weighted / norms
  condition = float(np.linalg.cond(scaled))**2
  if condition > tolerances.conditioning_limit:
    raise exceptions.IllConditioned(condition, tolerances.conditioning_limit)
  solution, *_ = np.linalg.lstsq(scaled, values * sqrt_weights, rcond=None)
  beta = solution / norms
  coefficients = beta * n[0]**(2 * np.arange(order + 1))
  residual = float(np.sqrt(np.mean((design @ beta - values)**2)))
  return ExpansionFit(float(coefficients[0]),
                      tuple(float(c) for c in coefficients[1:]), residual,
                      condition)


@functools.lru_cache(maxsize=1024)
def ngon_perimeter(table: BilliardTable,
                   n: int,
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
  """L_n of a table (memoised, tables are immutable)."""
  return max_perimeter_ngon(table, n, tolerances, build_chart(table)).perimeter


@dataclass
class InvariantReport:
  """
  Invariants of one table, optionally compared with a counterpart.

  Attributes:
      ell0 (float): Quadrature perimeter.
      ell1_quad (float): Quadrature value of l1.
      ell2_quad (float): Quadrature value of l2.
      fit (ExpansionFit): Fit of the L_n expansion.
      perimeters (dict[int, float]): L_n for each n of the grid.
      counterpart_diffs (dict[str, tuple[float, float]]): Absolute and
        relative difference of each invariant against the counterpart.
      congruence (float): Congruence distance to the counterpart.
  """
  ell0: float
  ell1_quad: float
  ell2_quad: float
  fit: ExpansionFit
  perimeters: dict[int, float] = field(default_factory=dict)
  counterpart_diffs: dict[str, tuple[float, float]] = field(
      default_factory=dict)
  congruence: float = math.nan

  @property
  def fit_c(self) -> tuple[float, ...]:
    return self.fit.coefficients

  @property
  def fit_residual(self) -> float:
    return self.fit.residual

  def values(self) -> dict[str, float]:
    """Named invariant values, in report order."""
    named = {
        'ell0': self.ell0,
        'ell1_quad': self.ell1_quad,
        'ell2_quad': self.ell2_quad,
        'fit_ell0': self.fit.ell0,
    }
    for k, c in enumerate(self.fit.coefficients, start=1):
      named[f'fit_c{k}'] = c
    return named


def invariant_report(table: BilliardTable,
                     n_grid: Sequence[int] = DEFAULT_N_GRID,
                     order: int = DEFAULT_ORDER,
                     tolerances: Tolerances = DEFAULT_TOLERANCES
                    ) -> InvariantReport:
  ell0, ell1, ell2 = mm_quadrature(table)
  perimeters = {
      int(n): ngon_perimeter(table, int(n), tolerances) for n in n_grid
  }
  fit = fit_expansion(perimeters.items(), order, tolerances)
  logger.info('invariants: ell0=%.15g, fit ell0=%.15g, residual %.2e', ell0,
              fit.ell0, fit.residual)
  return InvariantReport(ell0, ell1, ell2, fit, perimeters)


def compare_tables(
    first: BilliardTable,
    second: BilliardTable,
    n_grid: Sequence[int] = DEFAULT_N_GRID,
    order: int = DEFAULT_ORDER,
    tolerances: Tolerances = DEFAULT_TOLERANCES
) -> tuple[InvariantReport, InvariantReport]:
  """
  Invariant reports of two tables with their mutual differences.

  Args:
      first (BilliardTable): Table A.
      second (BilliardTable): Table B.
      n_grid (Sequence[int], optional): n values of the L_n fit.
      order (int, optional): Expansion order K.
      tolerances (Tolerances, optional): Tolerance set.

  Returns:
      tuple[InvariantReport, InvariantReport]: Reports of A and B, sharing
        the same difference table and congruence distance.
  """
  report_a = invariant_report(first, n_grid, order, tolerances)
  report_b = invariant_report(second, n_grid, order, tolerances)
  values_a, values_b = report_a.values(), report_b.values()
  diffs = {
      name: (abs(values_a[name] - values_b[name]),
             common.relative_difference(values_a[name], values_b[name]))
      for name in values_a
  }
  distance = congruence_distance(first, second)
  for report in (report_a, report_b):
    report.counterpart_diffs = dict(diffs)
    report.congruence = distance
  return report_a, report_b


def ngon_table(first: BilliardTable,
               second: BilliardTable,
               n_grid: Sequence[int] = DEFAULT_N_GRID,
               tolerances: Tolerances = DEFAULT_TOLERANCES) -> pd.DataFrame:
  """Side-by-side L_n of two tables, one row per n."""
  rows = []
  for n in n_grid:
    value_a = ngon_perimeter(first, int(n), tolerances)
    value_b = ngon_perimeter(second, int(n), tolerances)
    rows.append((value_a, value_b, value_a - value_b))
  return pd.DataFrame(rows,
                      index=pd.Index([int(n) for n in n_grid],
                                     name=NgonSchema.INDEX),
                      columns=common.get_multiindex_multiple_columns([
                          NgonSchema.PERIMETER_A, NgonSchema.PERIMETER_B,
                          NgonSchema.DIFF
                      ]))


def matched_orbit_gaps(table: BilliardTable,
                       thetas: Sequence[float],
                       tolerances: Tolerances = DEFAULT_TOLERANCES
                      ) -> pd.DataFrame:
  """
  Gap between L_q and the perimeter of each matched closed orbit of period q.

  Args:
      table (BilliardTable): A table matched at every angle of `thetas`.
      thetas (Sequence[float]): Matched angles.
      tolerances (Tolerances, optional): Tolerance set.

  Returns:
      pd.DataFrame: Columns theta, period, orbit perimeter, L_q and gap.
  """
  rows = []
  for theta in thetas:
    orbit = closed_orbit_from_match(table, theta, tolerances)
    maximal = ngon_perimeter(table, orbit.period, tolerances)
    rows.append((theta, orbit.period, orbit.perimeter, maximal,
                 maximal - orbit.perimeter))
  return pd.DataFrame(rows,
                      columns=common.get_multiindex_multiple_columns([
                          GapSchema.THETA, GapSchema.PERIOD,
                          GapSchema.ORBIT_PERIMETER, GapSchema.L_Q,
                          GapSchema.GAP
                      ]))
