import logging
import math

import numpy as np
import pytest
from scipy import optimize

from billiardlib.analysis import invariants
from billiardlib.analysis.comparison import TableComparison
from billiardlib.dynamics import ngon
from billiardlib.kernel.table import close_table
from billiardlib.lazutkin.chart import lazutkin_perimeter
from billiardlib.structures import enums, exceptions
from billiardlib.structures.settings import Tolerances
from billiardlib.structures.table_schema import CheckSchema, NgonSchema
from billiardlib.utillib import functions, sample_tables

CIRCLE_GRID = (16, 24, 32, 48, 64, 96, 128, 192, 256)


def circle_perimeter(n: int) -> float:
  return 2.0 * n * math.sin(math.pi / n)


@pytest.fixture(scope='module')
def rotated_oval():
  first, second = sample_tables.oval_blocks()
  return close_table([second, first, second, first])


@pytest.mark.parametrize('n', [3, 5, 8, 16])
def test_circle_ngon(circle_table, n):
  orbit = ngon.max_perimeter_ngon(circle_table, n)
  assert orbit.period == n
  assert orbit.perimeter == pytest.approx(circle_perimeter(n), rel=1e-13)


@pytest.mark.parametrize('n', [4, 32, 128, 256, 512])
def test_large_circle_ngon(circle_table, n):
  orbit = ngon.max_perimeter_ngon(circle_table, n)
  assert orbit.perimeter == pytest.approx(circle_perimeter(n), abs=1e-10)
  assert orbit.closure_residual <= 1e-10


def test_ngon_needs_two_vertices(circle_table):
  with pytest.raises(exceptions.PreconditionError):
    ngon.max_perimeter_ngon(circle_table, 1)


def test_oval_ngon_is_local_maximum(oval_table):
  orbit = ngon.max_perimeter_ngon(oval_table, 12)
  assert orbit.closure_residual <= 1e-10
  assert orbit.perimeter == pytest.approx(
      ngon.perimeter(oval_table, orbit.arclengths), rel=1e-15)
  for index in (0, 5):
    nudged = orbit.arclengths.copy()
    nudged[index] += 1e-4
    assert ngon.perimeter(oval_table, nudged) < orbit.perimeter



def test_ngon_logs_capped_moves(oval_table, caplog):
  n = 12
  with caplog.at_level(logging.DEBUG, logger=ngon.__name__):
    ngon.max_perimeter_ngon(oval_table, n)
  moves = [
      record.args[3]
      for record in caplog.records
      if record.name == ngon.__name__ and record.args
  ]
  assert moves
  assert max(moves) <= ngon.STEP_CAP * oval_table.length / n


@pytest.mark.parametrize('n', [100, 128, 256])
def test_oval_ngon_obeys_reflection_law(oval_table, n):
  orbit = ngon.max_perimeter_ngon(oval_table, n)
  assert orbit.period == n
  assert orbit.closure_residual <= 1e-10
  assert np.all(np.diff(orbit.arclengths) > 0.0)
  assert orbit.perimeter < oval_table.length


def _ascend_perimeter(table, start: np.ndarray) -> float:
  """Largest perimeter reached by BFGS from `start`."""

  def negative_perimeter(s):
    points = table.point(s)
    sides = np.roll(points, -1, axis=0) - points
    lengths = np.hypot(sides[:, 0], sides[:, 1])
    u = sides / lengths[:, None]
    tangents = functions.unit_vector(np.asarray(table.tangent_angle(s)))
    grad = np.einsum('ij,ij->i', tangents, np.roll(u, 1, axis=0) - u)
    return -math.fsum(lengths), -grad

  result = optimize.minimize(negative_perimeter,
                             start,
                             jac=True,
                             method='BFGS',
                             options={
                                 'gtol': 1e-12,
                                 'maxiter': 20_000
                             })
  return -float(result.fun)


def test_oval_ngon_matches_multistart_ascent(oval_table, rng):
  n = 100
  orbit = ngon.max_perimeter_ngon(oval_table, n)
  base = oval_table.length * np.arange(n) / n
  starts = [base] + [
      np.sort(base + rng.uniform(0.0, oval_table.length / n, n))
      for _ in range(2)
  ]
  best = max(_ascend_perimeter(oval_table, start) for start in starts)
  assert best == pytest.approx(orbit.perimeter, rel=1e-8)
  assert best <= orbit.perimeter * (1.0 + 1e-12)


def test_oval_perimeters_increase(oval_table):
  values = [invariants.ngon_perimeter(oval_table, n) for n in (6, 12, 24)]
  assert values[0] < values[1] < values[2] < oval_table.length


def test_circle_quadrature(circle_table):
  ell0, ell1, ell2 = invariants.mm_quadrature(circle_table)
  assert ell0 == pytest.approx(2.0 * math.pi, rel=1e-15)
  assert ell1 == pytest.approx(-4.0 * math.pi, rel=1e-12)
  assert ell2 == pytest.approx(math.pi / 60.0, rel=1e-12)


def test_quadrature_ignores_block_order(oval_table, rotated_oval):
  assert invariants.mm_quadrature(oval_table) == invariants.mm_quadrature(
      rotated_oval)


def test_fit_recovers_circle_expansion():
  samples = [(n, circle_perimeter(n)) for n in CIRCLE_GRID]
  fit = invariants.fit_expansion(samples, order=3)
  assert fit.ell0 == pytest.approx(2.0 * math.pi, abs=1e-10)
  assert fit.coefficients[0] == pytest.approx(-math.pi**3 / 3.0, rel=1e-7)
  assert fit.coefficients[1] == pytest.approx(math.pi**5 / 60.0, rel=1e-3)
  assert fit.residual < 1e-10
  assert fit.evaluate(20) == pytest.approx(circle_perimeter(20), abs=1e-10)


def test_fit_preconditions():
  with pytest.raises(exceptions.PreconditionError):
    invariants.fit_expansion([(n, circle_perimeter(n)) for n in (16, 32, 64)])
  narrow = [(n, circle_perimeter(n)) for n in range(20, 32, 2)]
  with pytest.raises(exceptions.PreconditionError):
    invariants.fit_expansion(narrow)


def test_fit_conditioning_limit():
  samples = [(n, circle_perimeter(n)) for n in CIRCLE_GRID]
  with pytest.raises(exceptions.IllConditioned):
    invariants.fit_expansion(samples, tolerances=Tolerances(
        conditioning_limit=1.0))


def test_oval_leading_coefficient(oval_table):
  report = invariants.invariant_report(oval_table)
  perimeter = lazutkin_perimeter(oval_table)
  assert report.fit.ell0 == pytest.approx(oval_table.length, abs=1e-7)
  assert report.fit_c[0] == pytest.approx(-perimeter**3 / 24.0, rel=1e-3)
  assert report.ell0 == pytest.approx(oval_table.length, rel=1e-15)


def test_rearranged_blocks_share_invariants(oval_table, rotated_oval):
  report_a, report_b = invariants.compare_tables(oval_table, rotated_oval)
  for name, (absolute, relative) in report_a.counterpart_diffs.items():
    assert relative < 1e-9, name
  assert report_a.congruence == report_b.congruence < 1e-7

  check = TableComparison(report_a, report_b)
  results = check.comparison_results()
  assert results.index.name == CheckSchema.INDEX
  assert results.loc['congruence_distance',
                     CheckSchema.STATUS] == enums.CheckStatus.CONGRUENT.value
  assert check.passed


def test_comparison_flags_different_tables(oval_table):
  circle = sample_tables.unit_circle_table().scaled(oval_table.length /
                                                    (2 * math.pi))
  report_a, report_b = invariants.compare_tables(oval_table, circle)
  check = TableComparison(report_a, report_b)
  statuses = check.comparison_results()[CheckSchema.STATUS]
  assert statuses['ell0'] == enums.CheckStatus.PASS.value
  assert statuses['ell1_quad'] == enums.CheckStatus.FAIL.value
  assert not check.passed


def test_ngon_table(oval_table, rotated_oval):
  frame = invariants.ngon_table(oval_table, rotated_oval, (8, 16))
  assert frame.index.name == NgonSchema.INDEX
  assert list(frame.index) == [8, 16]
  assert np.all(np.abs(frame[NgonSchema.DIFF].to_numpy()) < 1e-10)


def test_matched_orbit_is_maximal_on_circle(circle_table):
  gaps = invariants.matched_orbit_gaps(circle_table, [math.pi / 8])
  assert int(gaps[('period', '-')].iloc[0]) == 8
  assert abs(gaps[('gap', 'length')].iloc[0]) < 1e-12
