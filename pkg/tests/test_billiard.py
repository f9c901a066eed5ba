import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies
from scipy import optimize

from billiardlib.dynamics import billiard
from billiardlib.dynamics.billiard import PhaseState
from billiardlib.structures import exceptions
from billiardlib.structures.settings import Tolerances
from billiardlib.utillib import functions
from billiardlib.utillib.sample_tables import (random_quarter_table,
                                              unit_circle_table)


def test_phase_state_range():
  with pytest.raises(exceptions.PreconditionError):
    PhaseState(0.0, math.pi)


def test_next_bounce_on_circle(circle_table):
  state = billiard.next_bounce(circle_table, PhaseState(0.0, 0.25 * math.pi))
  assert state.s == pytest.approx(0.5 * math.pi, abs=1e-12)
  assert state.phi == pytest.approx(0.25 * math.pi, abs=1e-12)
  _, _, chord = billiard.advance(circle_table, 0.0, 0.25 * math.pi)
  assert chord == pytest.approx(math.sqrt(2.0), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(strategies.floats(min_value=0.01, max_value=3.1),
       strategies.floats(min_value=0.0, max_value=6.28))
def test_circle_preserves_angle(phi, s):
  table = unit_circle_table(4)
  state = billiard.next_bounce(table, PhaseState(s, phi))
  assert state.phi == pytest.approx(phi, abs=1e-10)
  expected = math.fmod(s + 2.0 * phi, 2.0 * math.pi)
  gap = abs(state.s - expected)
  assert min(gap, 2.0 * math.pi - gap) < 1e-10


def test_oval_bounce_obeys_reflection(oval_table):
  s, phi = 0.3, 0.9
  arclengths = [s]
  for _ in range(6):
    s, phi, _ = billiard.advance(oval_table, s, phi)
    arclengths.append(s)
  residuals = billiard.reflection_residuals(oval_table, np.array(arclengths),
                                            closed=False)
  assert residuals.shape == (5,)
  assert np.max(residuals) < 1e-10


def test_wall_shot_on_quarter_circle(quarter_block):
  shot = billiard.shoot_wall(quarter_block, math.pi / 8)
  np.testing.assert_allclose(shot.bounces, [0.25 * math.pi, 0.5 * math.pi],
                             atol=1e-12)
  assert shot.escape_index == 2
  assert shot.exit_arclength == pytest.approx(quarter_block.length)
  assert shot.exit_angle == pytest.approx(math.pi / 8, abs=1e-12)


def test_wall_shot_rejects_steep_angle(quarter_block):
  with pytest.raises(exceptions.PreconditionError):
    billiard.shoot_wall(quarter_block, 2.0)


def test_bounce_cap(quarter_block):
  capped = Tolerances(max_bounces=5)
  with pytest.raises(exceptions.IterationCap):
    billiard.shoot_wall(quarter_block, 0.01, capped)


def test_half_wall_count(quarter_block):
  shot = billiard.shoot_wall(quarter_block, 0.1)
  np.testing.assert_allclose(shot.bounces[:3], [0.2, 0.4, 0.6], atol=1e-12)
  assert billiard.half_wall_count(shot, quarter_block.length) == 3


@pytest.mark.parametrize('theta,p', [(math.pi / 8, 1), (math.pi / 24, 3),
                                     (math.pi / 40, 5)])
def test_midpoint_match_on_quarter_circle(quarter_block, theta, p):
  result = billiard.is_match(quarter_block, theta)
  assert result.matched
  assert result.p == p
  assert result.residual < 1e-12


def test_unmatched_angle(quarter_block):
  result = billiard.is_match(quarter_block, 0.3)
  assert not result.matched
  assert result.p == 1
  assert result.residual == pytest.approx(0.25 * math.pi - 0.6, abs=1e-12)


def test_closed_orbit_on_circle(circle_table):
  orbit = billiard.closed_orbit_from_match(circle_table, math.pi / 8)
  assert orbit.closed
  assert orbit.period == 8
  assert orbit.perimeter == pytest.approx(16.0 * math.sin(math.pi / 8),
                                          rel=1e-13)
  assert orbit.closure_residual <= 1e-9
  assert np.max(billiard.reflection_residuals(circle_table,
                                              orbit.arclengths)) < 1e-10


def test_unmatched_angle_does_not_close(circle_table):
  with pytest.raises(exceptions.ClosureFailure):
    billiard.closed_orbit_from_match(circle_table, 0.3)


def test_time_reversal_visits_same_points(circle_table):
  orbit = billiard.closed_orbit_from_match(circle_table, math.pi / 8)
  backwards = billiard.time_reversed(circle_table, orbit)
  forward = np.sort(np.mod(orbit.arclengths, circle_table.length))
  reversed_points = np.sort(np.mod(backwards, circle_table.length))
  gaps = np.abs(forward - reversed_points)
  gaps = np.minimum(gaps, circle_table.length - gaps)
  assert np.max(gaps) < 1e-9


def _sampled_bounce(table, s: float, phi: float,
                    samples: int = 200_000) -> tuple[float, float]:
  """Next bounce from a dense scan of the boundary and a local root solve."""
  origin = table.point(s)
  direction = functions.unit_vector(float(table.tangent_angle(s)) + phi)

  def side(sigma):
    return functions.cross2(direction, table.point(sigma) - origin)

  sigma = s + np.linspace(0.0, table.length, samples + 1)[1:-1]
  values = side(sigma)
  crossing = int(np.flatnonzero((values[:-1] < 0.0) & (values[1:] >= 0.0))[0])
  hit = optimize.brentq(lambda x: float(side(x)),
                        sigma[crossing],
                        sigma[crossing + 1],
                        xtol=1e-15,
                        rtol=4e-16)
  chord = table.point(hit) - origin
  tangent = functions.unit_vector(float(table.tangent_angle(hit)))
  phi_next = math.atan2(functions.cross2(chord, tangent), chord @ tangent)
  return math.fmod(hit, table.length), phi_next


@settings(max_examples=5, deadline=None)
@given(strategies.integers(min_value=0, max_value=2**16),
       strategies.floats(min_value=0.0, max_value=0.999),
       strategies.floats(min_value=0.05, max_value=3.0))
def test_next_bounce_matches_dense_scan(seed, fraction, phi):
  table = random_quarter_table(np.random.default_rng(seed))
  s = fraction * table.length
  expected_s, expected_phi = _sampled_bounce(table, s, phi)
  state = billiard.next_bounce(table, PhaseState(s, phi))
  gap = abs(state.s - expected_s)
  assert min(gap, table.length - gap) < 1e-9
  assert state.phi == pytest.approx(expected_phi, abs=1e-9)
