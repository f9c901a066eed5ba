import math

import numpy as np
import pytest

from billiardlib.dynamics.billiard import PhaseState
from billiardlib.kernel.block import BumpLayout, perturb_block
from billiardlib.lazutkin import chart as lazutkin
from billiardlib.lazutkin import estimates
from billiardlib.lazutkin.chart import LazutkinState
from billiardlib.structures import exceptions
from billiardlib.structures.table_schema import EstimateSchema


def test_circle_chart(circle_table):
  chart = lazutkin.build_chart(circle_table)
  assert chart.c_omega == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-13)
  assert chart.x_of_s(math.pi) == pytest.approx(0.5, abs=1e-13)
  assert chart.x_of_s(2.0 * math.pi + 1.0) == pytest.approx(
      1.0 + 1.0 / (2.0 * math.pi), abs=1e-13)
  assert chart.s_of_x(0.25) == pytest.approx(0.5 * math.pi, abs=1e-12)


def test_chart_inverse_on_oval(oval_table):
  chart = lazutkin.build_chart(oval_table)
  s = np.linspace(0.0, oval_table.length, 41)[:-1]
  np.testing.assert_allclose(chart.s_of_x(chart.x_of_s(s)), s, atol=1e-11)
  x = np.asarray(chart.x_of_s(s))
  assert np.all(np.diff(x) > 0.0)


def test_chart_normalisation(oval_table):
  chart = lazutkin.build_chart(oval_table)
  assert lazutkin.lazutkin_perimeter(oval_table) == pytest.approx(
      1.0 / chart.c_omega, rel=1e-12)
  assert chart.x_of_s(oval_table.length) == pytest.approx(1.0, abs=1e-13)


def test_lazutkin_perimeter_of_circle(circle_table, quarter_block):
  assert lazutkin.lazutkin_perimeter(circle_table) == pytest.approx(
      2.0 * math.pi, rel=1e-13)
  assert lazutkin.lazutkin_perimeter(quarter_block) == pytest.approx(
      0.5 * math.pi, rel=1e-13)


def test_state_conversion(oval_table):
  chart = lazutkin.build_chart(oval_table)
  state = PhaseState(1.3, 0.2)
  mapped = lazutkin.to_lazutkin(chart, oval_table, state)
  assert mapped.y > 0.0
  back = lazutkin.from_lazutkin(chart, oval_table, mapped)
  assert back.s == pytest.approx(state.s, abs=1e-11)
  assert back.phi == pytest.approx(state.phi, abs=1e-11)


def test_y_without_angle(circle_table):
  chart = lazutkin.build_chart(circle_table)
  with pytest.raises(exceptions.PreconditionError):
    lazutkin.from_lazutkin(chart, circle_table, LazutkinState(0.1, 5.0))


def test_circle_conserves_y(circle_table):
  result = estimates.verify_glancing_estimates(circle_table,
                                               [0.02, 0.01, 0.005])
  assert result.e_y == math.inf
  assert list(result.table[EstimateSchema.N]) == [200, 100, 50]
  assert np.all(result.table[EstimateSchema.D_X].to_numpy() > 0.0)


def test_glancing_table_on_oval(oval_table):
  result = estimates.verify_glancing_estimates(oval_table, [0.04, 0.02, 0.01])
  assert len(result.table) == 3
  assert np.all(result.table[EstimateSchema.D_Y].to_numpy() >= 0.0)
  assert -1.0 <= result.trend_tau <= 1.0


def test_glancing_range(oval_table):
  with pytest.raises(exceptions.PreconditionError):
    estimates.verify_glancing_estimates(oval_table, [0.1])


def test_bounce_count_law(quarter_block):
  law = estimates.bounce_count_law(quarter_block, 0.01)
  assert law.lazutkin_perimeter == pytest.approx(0.5 * math.pi, rel=1e-13)
  assert law.bounces > 100
  assert law.relative_error < 0.02


def test_circle_x_drift_decays_quadratically(circle_table):
  result = estimates.verify_glancing_estimates(circle_table,
                                               [0.02, 0.01, 0.005])
  assert result.e_x == pytest.approx(-2.0, abs=0.01)


@pytest.mark.parametrize('delta', [0.01, -0.01])
def test_perturbation_lowers_lazutkin_perimeter(quarter_block, delta):
  block = perturb_block(quarter_block, (0.3, 0.6), BumpLayout(), delta)
  assert block.turning == pytest.approx(quarter_block.turning, abs=1e-12)
  assert block.chord == pytest.approx(quarter_block.chord, abs=1e-12)
  # with the turning fixed, concavity of k^(2/3) forces a strict decrease
  assert lazutkin.lazutkin_perimeter(block) < 0.5 * math.pi - 1e-9
  law = estimates.bounce_count_law(block, 0.01)
  assert law.lazutkin_perimeter == lazutkin.lazutkin_perimeter(block)
  assert law.relative_error < 0.02


@pytest.mark.slow
@pytest.mark.parametrize('side', ['table_a', 'table_b'])
def test_constructed_table_glancing_exponents(default_run, side):
  result = estimates.verify_glancing_estimates(getattr(default_run, side),
                                               [0.05, 0.02, 0.01, 0.005])
  # +inf marks a y drift below the noise floor at every N
  assert result.e_y == math.inf or result.e_y <= -2.7
  assert result.e_x <= -1.8
