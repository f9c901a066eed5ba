import math

import pandas as pd
import pytest

from billiardlib import __version__, cli
from billiardlib.construction.scheme import MatchCertificate
from billiardlib.dynamics import billiard
from billiardlib.io import render, serialization
from billiardlib.structures.enums import ExitCode
from billiardlib.structures.table_schema import GapSchema, NgonSchema


@pytest.fixture
def circle_file(tmp_path, circle_table):
  return serialization.write_table(tmp_path / 'circle.yaml', circle_table)


def test_render_is_deterministic(tmp_path, oval_table, circle_table):
  orbit = billiard.closed_orbit_from_match(circle_table, math.pi / 8)
  first = render.render_tables(tmp_path / 'one.svg',
                               [circle_table, oval_table], [orbit, None])
  second = render.render_tables(tmp_path / 'two.svg',
                                [circle_table, oval_table], [orbit, None])
  assert first.read_bytes() == second.read_bytes()
  assert first.read_text(encoding='utf-8').lstrip().startswith('<?xml')


def test_version(capsys):
  assert cli.main(['--version']) == ExitCode.OK
  assert __version__ in capsys.readouterr().out


def test_unknown_command():
  assert cli.main(['sculpt']) == ExitCode.USAGE


def test_missing_input_is_usage_error(tmp_path):
  code = cli.main([
      'verify',
      str(tmp_path / 'a.yaml'),
      str(tmp_path / 'b.yaml'),
      str(tmp_path / 'c.csv')
  ])
  assert code == ExitCode.USAGE


def test_bad_config_exit_code(tmp_path, circle_file):
  bad = tmp_path / 'bad.ini'
  bad.write_text('[scheme]\nwobble = 1\n', encoding='utf-8')
  code = cli.main(['orbits', str(circle_file), '--config', str(bad)])
  assert code == ExitCode.CONFIG


def test_trivial_permutation_exit_code(tmp_path):
  rotation = tmp_path / 'rotation.ini'
  rotation.write_text('[scheme]\npermutation = 2, 3, 4, 1\n', encoding='utf-8')
  code = cli.main([
      'construct', '--config',
      str(rotation), '--out-dir',
      str(tmp_path / 'out')
  ])
  assert code == ExitCode.INVALID_PERMUTATION


def test_orbits_command(tmp_path, circle_file):
  out_dir = tmp_path / 'orbits'
  code = cli.main([
      'orbits',
      str(circle_file), '--theta',
      repr(math.pi / 8), '--ngon', '6', '--out-dir',
      str(out_dir)
  ])
  assert code == ExitCode.OK
  header, frame = serialization.read_orbit(out_dir / 'orbit_theta_1.csv')
  assert header['period'] == 8
  assert len(frame) == 8
  header, _ = serialization.read_orbit(out_dir / 'ngon_6.csv')
  assert header['perimeter'] == pytest.approx(12.0 * math.sin(math.pi / 6),
                                              rel=1e-13)


def test_orbits_needs_an_angle(circle_file):
  assert cli.main(['orbits', str(circle_file)]) == ExitCode.PRECONDITION


def test_unmatched_angle_exit_code(tmp_path, circle_file):
  code = cli.main([
      'orbits',
      str(circle_file), '--theta', '0.3', '--out-dir',
      str(tmp_path)
  ])
  assert code == ExitCode.CLOSURE_FAILURE


def test_render_command(tmp_path, circle_file):
  output = tmp_path / 'drawing.svg'
  code = cli.main(['render', str(circle_file), '--output', str(output)])
  assert code == ExitCode.OK
  assert output.stat().st_size > 0


def test_invariants_command(tmp_path, circle_file):
  settings_file = tmp_path / 'short.ini'
  settings_file.write_text(
      '[invariants]\nn_grid = 8, 12, 16, 24, 32, 48\norder = 2\n',
      encoding='utf-8')
  out_dir = tmp_path / 'inv'
  code = cli.main([
      'invariants',
      str(circle_file),
      str(circle_file), '--config',
      str(settings_file), '--out-dir',
      str(out_dir)
  ])
  assert code == ExitCode.OK
  document = serialization.read_yaml(out_dir / 'invariants.yaml')
  assert document['n_grid'] == [8, 12, 16, 24, 32, 48]
  assert document['table_a']['ell0'] == pytest.approx(2 * math.pi)
  assert document['congruence_distance'] < 1e-10
  assert (out_dir / 'ngon.csv').stat().st_size > 0


def test_estimates_command(tmp_path, circle_file):
  code = cli.main([
      'estimates',
      str(circle_file), '--y0', '0.02', '--y0', '0.01', '--y0', '0.005',
      '--out-dir',
      str(tmp_path)
  ])
  assert code == ExitCode.OK
  frame = serialization.read_frame(tmp_path / 'estimates.csv')
  assert len(frame) == 3


def test_verify_writes_ngon_and_gap_tables(tmp_path, circle_file):
  certificates = serialization.write_certificates(
      tmp_path / 'certificates.csv', [
          MatchCertificate(1, k, math.pi / 8, 0.0, 1, 0.0, (0.1, 0.2))
          for k in range(1, 5)
      ])
  settings_file = tmp_path / 'short.ini'
  settings_file.write_text(
      '[invariants]\nn_grid = 8, 12, 16, 24, 32, 48\norder = 2\n',
      encoding='utf-8')
  out_dir = tmp_path / 'verify'
  code = cli.main([
      'verify',
      str(circle_file),
      str(circle_file),
      str(certificates), '--config',
      str(settings_file), '--out-dir',
      str(out_dir)
  ])
  # a table is congruent to itself, so the pair is not a counterexample
  assert code == ExitCode.VERIFY_FAILED
  perimeters = pd.read_csv(out_dir / 'ngon.csv', header=[0, 1], index_col=0)
  assert list(perimeters.index) == [8, 12, 16, 24, 32, 48]
  assert perimeters[NgonSchema.DIFF].abs().max() < 1e-12
  for name in ('gaps_a.csv', 'gaps_b.csv'):
    gaps = serialization.read_frame(out_dir / name)
    assert list(gaps[GapSchema.PERIOD]) == [8]
    assert abs(gaps[GapSchema.GAP].iloc[0]) < 1e-12


@pytest.mark.slow
def test_construct_then_verify(tmp_path):
  out_dir = tmp_path / 'run'
  assert cli.main(['construct', '--out-dir', str(out_dir)]) == ExitCode.OK
  for name in ('table_a.yaml', 'table_b.yaml', 'certificates.csv', 'run.log',
               'manifest.yaml'):
    assert (out_dir / name).exists()
  manifest = serialization.read_yaml(out_dir / 'manifest.yaml')
  assert manifest['config']['scheme']['permutation'] == [1, 3, 2, 4]
  assert 'run_scheme' in manifest['timings_seconds']

  code = cli.main([
      'verify',
      str(out_dir / 'table_a.yaml'),
      str(out_dir / 'table_b.yaml'),
      str(out_dir / 'certificates.csv'), '--out-dir',
      str(tmp_path / 'verify')
  ])
  assert code == ExitCode.OK
  for name in ('ngon.csv', 'gaps_a.csv', 'gaps_b.csv'):
    assert (tmp_path / 'verify' / name).stat().st_size > 0

  again = tmp_path / 'again'
  assert cli.main(['construct', '--out-dir', str(again)]) == ExitCode.OK
  for name in ('table_a.yaml', 'table_b.yaml', 'certificates.csv'):
    assert (again / name).read_bytes() == (out_dir / name).read_bytes()
