from pathlib import Path

import pytest

from billiardlib.analysis.invariants import DEFAULT_N_GRID
from billiardlib.construction.scheme import SchemeConfig
from billiardlib.io import config
from billiardlib.structures import exceptions


def write_config(tmp_path: Path, text: str) -> Path:
  path = tmp_path / 'run.ini'
  path.write_text(text, encoding='utf-8')
  return path


def test_default_config_matches_defaults():
  settings = config.load_settings({'config': config.default_config_path()},
                                  environ={})
  assert settings.scheme == SchemeConfig()
  assert settings.n_grid == DEFAULT_N_GRID
  assert settings.order == 3
  assert settings.out_dir == Path('billiard_out')
  assert settings.log_level == 'INFO'


def test_no_config_uses_defaults():
  settings = config.load_settings({}, environ={})
  assert settings.source is None
  assert settings.scheme == SchemeConfig()


def test_flag_beats_environment_beats_file(tmp_path):
  path = write_config(tmp_path, '[scheme]\nseed = 5\n')
  flags = {'config': path, 'seed': 9}
  environ = {'BILLIARDLIB_SEED': '7'}
  assert config.load_settings(flags, environ).scheme.seed == 9
  assert config.load_settings({'config': path}, environ).scheme.seed == 7
  assert config.load_settings({'config': path}, {}).scheme.seed == 5


def test_config_path_from_environment(tmp_path):
  path = write_config(tmp_path, '[output]\nlog_level = debug\n')
  settings = config.load_settings({}, {'BILLIARDLIB_CONFIG': str(path)})
  assert settings.log_level == 'DEBUG'
  assert settings.source == path


def test_tolerance_scale(tmp_path):
  path = write_config(tmp_path, '[tolerances]\nroot_rel = 1e-12\n'
                      'tol_scale = 10\n')
  settings = config.load_settings({'config': path}, {})
  assert settings.tolerances.root_rel == pytest.approx(1e-11)
  assert settings.tolerances.max_bounces == 1_000_000
  flagged = config.load_settings({'config': path, 'tol_scale': 0.5}, {})
  assert flagged.tol_scale == 0.5
  assert flagged.tolerances.root_rel == pytest.approx(5e-13)


def test_unknown_key_names_key_and_line(tmp_path):
  path = write_config(tmp_path, '[scheme]\nn = 4\nwobble = 1\n')
  with pytest.raises(exceptions.ConfigError) as caught:
    config.read_config_file(path)
  assert caught.value.key == 'wobble'
  assert caught.value.line == 3


def test_bad_value(tmp_path):
  path = write_config(tmp_path, '[scheme]\nrounds = three\n')
  with pytest.raises(exceptions.ConfigError) as caught:
    config.read_config_file(path)
  assert caught.value.key == 'rounds'
  assert caught.value.line == 2


def test_unknown_section(tmp_path):
  path = write_config(tmp_path, '[scheme]\nn = 4\n\n[extras]\nx = 1\n')
  with pytest.raises(exceptions.ConfigError) as caught:
    config.read_config_file(path)
  assert caught.value.key == 'extras'
  assert caught.value.line == 4


def test_bad_log_level(tmp_path):
  path = write_config(tmp_path, '[output]\nlog_level = loud\n')
  with pytest.raises(exceptions.ConfigError):
    config.read_config_file(path)


def test_missing_config_file(tmp_path):
  with pytest.raises(FileNotFoundError):
    config.load_settings({'config': tmp_path / 'absent.ini'}, {})


def test_bad_environment_value():
  with pytest.raises(exceptions.ConfigError) as caught:
    config.load_settings({}, {'BILLIARDLIB_TOL_SCALE': 'tiny'})
  assert caught.value.key == 'BILLIARDLIB_TOL_SCALE'


def test_invalid_permutation_in_file(tmp_path):
  path = write_config(tmp_path, '[scheme]\npermutation = 2, 3, 4, 1\n')
  with pytest.raises(exceptions.InvalidPermutation):
    config.load_settings({'config': path}, {})
