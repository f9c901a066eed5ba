import math

import numpy as np
import pytest

from billiardlib.analysis import invariants
from billiardlib.construction import scheme
from billiardlib.construction.scheme import SchemeConfig
from billiardlib.dynamics import billiard
from billiardlib.kernel.block import sup_curvature_change
from billiardlib.structures import enums, exceptions
from billiardlib.structures.table_schema import GapSchema

NEAR_MATCH = (math.pi / 32) * (1.0 + 2e-4)


@pytest.mark.parametrize('perm,form', [
    ((2, 3, 4, 1), enums.PermutationForm.ROTATION),
    ((1, 2, 3, 4), enums.PermutationForm.ROTATION),
    ((4, 3, 2, 1), enums.PermutationForm.REFLECTION),
    ((2, 1, 4, 3), enums.PermutationForm.REFLECTION),
    ((1, 3, 2, 4), None),
    ((1, 2, 4, 3), None),
])
def test_permutation_form(perm, form):
  assert scheme.permutation_form(perm, 4) is form
  assert scheme.valid_permutation(perm, 4) == (form is None)


def test_permutation_must_be_bijection():
  with pytest.raises(exceptions.InvalidPermutation):
    scheme.permutation_form((1, 1, 2, 3), 4)


def test_config_rejects_trivial_permutation():
  with pytest.raises(exceptions.InvalidPermutation) as caught:
    SchemeConfig(permutation=(2, 3, 4, 1))
  assert caught.value.form == enums.PermutationForm.ROTATION.value
  assert caught.value.exit_code == enums.ExitCode.INVALID_PERMUTATION


@pytest.mark.parametrize('changes', [{
    'n': 3,
    'permutation': (1, 3, 2)
}, {
    'rounds': 0
}, {
    'epsilon': 0.0
}, {
    'theta_seed': 2.0
}, {
    'sweep_points': 16
}])
def test_config_preconditions(changes):
  with pytest.raises(exceptions.PreconditionError):
    SchemeConfig(**changes)


def test_circle_blocks():
  blocks = scheme.init_circle_blocks(4)
  assert len(blocks) == 4
  for block in blocks:
    assert block.length == pytest.approx(0.5 * math.pi)
    assert block.base == 1.0


def test_candidate_supports_avoid_bounces():
  length = 0.5 * math.pi
  recorded = [length / 8, length / 4, 3 * length / 8, length / 2,
              5 * length / 8]
  supports = scheme.candidate_supports(length, recorded, 0.01)
  assert len(supports) == 4
  for lo, hi in supports:
    assert not any(lo <= r <= hi for r in recorded)
    assert hi - lo == pytest.approx(0.8 * length / 8)
  with pytest.raises(exceptions.SupportExhausted):
    scheme.candidate_supports(length, recorded, 0.5)


def test_candidate_supports_widest_first():
  supports = scheme.candidate_supports(1.0, [0.1], 0.01)
  widths = [hi - lo for lo, hi in supports]
  assert widths == sorted(widths, reverse=True)
  assert supports[0] == pytest.approx((0.14, 0.46))


def test_matching_angle_on_quarter_circle(quarter_block):
  assert scheme.matching_angle(quarter_block, 3) == pytest.approx(math.pi / 24,
                                                                  rel=1e-12)


def test_choose_matching_angle(quarter_block):
  theta, p = scheme.choose_matching_angle([quarter_block] * 4, 0.1)
  assert p == 4
  assert theta == pytest.approx(math.pi / 32, rel=1e-12)
  smaller, q = scheme.choose_matching_angle([quarter_block] * 4, 0.1, theta)
  assert q == 5
  assert smaller < theta


def test_fingerprints_make_blocks_distinct():
  blocks = scheme.init_circle_blocks(4)
  marked = scheme.fingerprint_perturb(blocks, 0.02, seed=3)
  assert len({b.profile for b in marked}) == 4
  for before, after in zip(blocks, marked):
    assert after.turning == pytest.approx(before.turning, abs=1e-12)
    assert after.chord == pytest.approx(before.chord, abs=1e-12)
    assert 0.0 < sup_curvature_change(before, after) <= 1.05 * 0.25 * 0.02e-3
  assert scheme.fingerprint_perturb(blocks, 0.0) == blocks


def test_match_angle_to_block(quarter_block):
  support = scheme.candidate_supports(quarter_block.length, [],
                                      0.02 * quarter_block.length)[0]
  assert not billiard.is_match(quarter_block, NEAR_MATCH).matched
  matched, certificate = scheme.match_angle_to_block(quarter_block, NEAR_MATCH,
                                                     support, 0.01)
  assert billiard.is_match(matched, NEAR_MATCH).matched
  assert certificate.residual <= 1e-9 * quarter_block.length
  assert certificate.delta_star != 0.0
  assert certificate.p >= 4
  assert certificate.curvature_change <= 1.05 * 0.01
  assert matched.turning == pytest.approx(quarter_block.turning, abs=1e-12)


def test_already_matched_block_is_kept(quarter_block):
  block, certificate = scheme.match_angle_to_block(quarter_block,
                                                   math.pi / 32, (0.1, 0.6),
                                                   0.01)
  assert block is quarter_block
  assert certificate.delta_star == 0.0
  assert certificate.p == 4


def test_tiny_budget_has_no_discontinuity(quarter_block):
  with pytest.raises(exceptions.NoDiscontinuity):
    scheme.match_angle_to_block(quarter_block, (math.pi / 32) * 1.05,
                                (0.1, 0.6), 1e-12)


@pytest.mark.slow
def test_default_run_matches_every_round(default_run):
  config = SchemeConfig()
  assert len(default_run.thetas) == config.rounds
  assert default_run.thetas == sorted(default_run.thetas, reverse=True)
  assert len(default_run.certificates) == config.rounds * config.n
  for certificate in default_run.certificates:
    assert certificate.residual <= 1e-9 * 0.5 * math.pi
    budget = config.epsilon / 2**certificate.round
    assert certificate.curvature_change <= 1.05 * budget
  for block in default_run.blocks:
    assert block.profile.min_kappa() > 0.2 * block.base
    for theta in default_run.thetas:
      assert billiard.is_match(block, theta, 1e-8 * block.length).matched


@pytest.mark.slow
def test_default_run_orbits_agree(default_run):
  for theta, period in zip(default_run.thetas,
                           default_run.report['periods']):
    orbit_a = billiard.closed_orbit_from_match(default_run.table_a, theta)
    orbit_b = billiard.closed_orbit_from_match(default_run.table_b, theta)
    assert orbit_a.period == orbit_b.period == period
    assert orbit_b.perimeter == pytest.approx(orbit_a.perimeter, rel=1e-8)


@pytest.mark.slow
def test_default_run_is_a_counterexample(default_run):
  assert default_run.report['congruence_distance'] >= 1e-7
  quad_a = invariants.mm_quadrature(default_run.table_a)
  quad_b = invariants.mm_quadrature(default_run.table_b)
  np.testing.assert_allclose(quad_a, quad_b, rtol=1e-12)
  assert default_run.table_a.length == pytest.approx(
      default_run.table_b.length, rel=1e-15)


@pytest.mark.slow
def test_single_round_is_deterministic():
  config = SchemeConfig(rounds=1, seed=7)
  first = scheme.run_scheme(config)
  second = scheme.run_scheme(config)
  assert first.certificates == second.certificates
  assert first.thetas == second.thetas


@pytest.mark.slow
def test_default_run_expansions_agree(default_run):
  report_a, report_b = invariants.compare_tables(default_run.table_a,
                                                 default_run.table_b)
  for report in (report_a, report_b):
    assert report.fit.ell0 == pytest.approx(report.ell0, abs=1e-7)
  for name in ('fit_c1', 'fit_c2'):
    _, relative = report_a.counterpart_diffs[name]
    assert relative < 1e-4, name


@pytest.mark.slow
def test_matched_orbit_gaps_shrink(default_run):
  gaps = invariants.matched_orbit_gaps(default_run.table_a,
                                       default_run.thetas)
  periods = gaps[GapSchema.PERIOD].to_numpy()
  values = gaps[GapSchema.GAP].to_numpy()
  assert np.all(np.diff(periods) > 0)
  assert np.all(values >= -1e-12)
  for larger, smaller in zip(values[:-1], values[1:]):
    # below 1e-12 the gap is roundoff
    assert smaller <= max(0.25 * larger, 1e-12)


@pytest.mark.slow
def test_supports_avoid_earlier_bounces(default_run):
  for certificate in default_run.certificates:
    block = default_run.blocks[certificate.block_index - 1]
    lo, hi = certificate.support
    mirrored = (block.length - hi, block.length - lo)
    for theta in default_run.thetas[:certificate.round - 1]:
      bounces = np.asarray(billiard.shoot_wall(block, theta).bounces)
      for left, right in (certificate.support, mirrored):
        assert not np.any((bounces >= left) & (bounces <= right))
