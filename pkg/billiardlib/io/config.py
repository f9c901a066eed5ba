"""
Run configuration from an INI file, environment variables and flags.

Precedence is flag > environment > file > built-in default. The file has
the sections [scheme], [tolerances], [invariants] and [output].
"""
import configparser
import dataclasses
import logging
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping

from billiardlib.analysis.invariants import DEFAULT_N_GRID, DEFAULT_ORDER
from billiardlib.construction.scheme import SchemeConfig
from billiardlib.structures import exceptions
from billiardlib.structures.settings import Tolerances

logger = logging.getLogger(__name__)

ENV_PREFIX = 'BILLIARDLIB_'
ENV_KEYS = ('config', 'out_dir', 'tol_scale', 'seed', 'log_level')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


def _int_list(text: str) -> tuple[int, ...]:
  items = [item for item in re.split(r'[\s,]+', text.strip('()[] ')) if item]
  if not items:
    raise ValueError('empty list')
  return tuple(int(item) for item in items)


def _log_level(text: str) -> str:
  level = text.strip().upper()
  if level not in LOG_LEVELS:
    raise ValueError(f'expected one of {", ".join(LOG_LEVELS)}')
  return level


SCHEME_KEYS: dict[str, Callable[[str], Any]] = {
    'n': int,
    'permutation': _int_list,
    'rounds': int,
    'epsilon': float,
    'theta_seed': float,
    'seed': int,
    'sweep_points': int,
    'min_support_fraction': float,
    'fingerprint_scale': float,
}
TOLERANCE_KEYS: dict[str, Callable[[str], Any]] = {
    f.name: (int if f.type in (int, 'int') else float)
    for f in dataclasses.fields(Tolerances)
}
TOLERANCE_KEYS['tol_scale'] = float
INVARIANT_KEYS: dict[str, Callable[[str], Any]] = {
    'n_grid': _int_list,
    'order': int,
}
OUTPUT_KEYS: dict[str, Callable[[str], Any]] = {
    'out_dir': Path,
    'log_level': _log_level,
}
SECTIONS = {
    'scheme': SCHEME_KEYS,
    'tolerances': TOLERANCE_KEYS,
    'invariants': INVARIANT_KEYS,
    'output': OUTPUT_KEYS,
}
OVERRIDE_TYPES: dict[str, Callable[[str], Any]] = {
    'out_dir': Path,
    'tol_scale': float,
    'seed': int,
    'log_level': _log_level,
}


@dataclass
class RunSettings:
  """
  Everything a CLI command needs to know about the run.

  Attributes:
      scheme (SchemeConfig): Construction parameters, tolerances included.
      n_grid (tuple[int, ...]): n values of the L_n fit.
      order (int): Expansion order of the fit.
      out_dir (Path): Output directory.
      log_level (str): Logging level name.
      tol_scale (float): Global tolerance multiplier already applied.
      source (Path | None): The config file that was read, if any.
  """
  scheme: SchemeConfig = field(default_factory=SchemeConfig)
  n_grid: tuple[int, ...] = DEFAULT_N_GRID
  order: int = DEFAULT_ORDER
  out_dir: Path = Path('billiard_out')
  log_level: str = 'INFO'
  tol_scale: float = 1.0
  source: Path | None = None

  @property
  def tolerances(self) -> Tolerances:
    return self.scheme.tolerances

  def as_dict(self) -> dict[str, Any]:
    return {
        'scheme': self.scheme.as_dict(),
        'n_grid': list(self.n_grid),
        'order': self.order,
        'out_dir': str(self.out_dir),
        'log_level': self.log_level,
        'tol_scale': self.tol_scale,
        'source': str(self.source) if self.source else None,
    }


def default_config_path() -> Path:
  return Path(str(resources.files('billiardlib') / 'configs' / 'default.ini'))


def _key_line(text: str, section: str, key: str) -> int | None:
  """1-based line of `key` inside `section` of an INI text."""
  current = None
  for number, raw in enumerate(text.splitlines(), start=1):
    line = raw.strip()
    header = re.fullmatch(r'\[([^\]]+)\]', line)
    if header:
      current = header.group(1).strip().lower()
    elif current == section and re.match(rf'{re.escape(key)}\s*[=:]', line,
                                         re.IGNORECASE):
      return number
  return None


def _section_line(text: str, section: str) -> int | None:
  for number, raw in enumerate(text.splitlines(), start=1):
    if raw.strip().lower() == f'[{section}]':
      return number
  return None


def read_config_file(path: Path) -> dict[str, dict[str, Any]]:
  """
  Parse and type-check a config file.

  Args:
      path (Path): The INI file.

  Returns:
      dict[str, dict[str, Any]]: Typed values per section.

  Raises:
      ConfigError: Naming the key and line of an unknown key or bad value.
  """
  try:
    text = path.read_text(encoding='utf-8')
  except OSError as error:
    raise exceptions.ConfigError(f'cannot read {path}: {error}') from error
  parser = configparser.ConfigParser(interpolation=None)
  try:
    parser.read_string(text, source=str(path))
  except configparser.Error as error:
    line = getattr(error, 'lineno', None)
    raise exceptions.ConfigError(f'malformed config: {error.message}',
                                 line=line) from error

  values: dict[str, dict[str, Any]] = {}
  for section in parser.sections():
    if section not in SECTIONS:
      raise exceptions.ConfigError(f'unknown section [{section}]',
                                   key=section,
                                   line=_section_line(text, section))
    converters = SECTIONS[section]
    values[section] = {}
    for key, raw in parser.items(section):
      line = _key_line(text, section, key)
      if key not in converters:
        raise exceptions.ConfigError(f'unknown key in [{section}]',
                                     key=key,
                                     line=line)
      try:
        values[section][key] = converters[key](raw)
      except ValueError as error:
        raise exceptions.ConfigError(f'bad value {raw!r} ({error})',
                                     key=key,
                                     line=line) from error
  return values


def environment_overrides(environ: Mapping[str, str]) -> dict[str, str]:
  return {
      key: environ[ENV_PREFIX + key.upper()]
      for key in ENV_KEYS
      if environ.get(ENV_PREFIX + key.upper())
  }


def load_settings(flags: Mapping[str, Any] | None = None,
                  environ: Mapping[str, str] | None = None) -> RunSettings:
  """
  Resolve the run settings from flags, environment and config file.

  Args:
      flags (Mapping[str, Any] | None, optional): Command-line values for
        config, out_dir, tol_scale, seed and log_level; None means unset.
      environ (Mapping[str, str] | None, optional): Environment; defaults
        to `os.environ`.

  Returns:
      RunSettings: The resolved settings.

  Raises:
      FileNotFoundError: If the config file does not exist.
      ConfigError: For unreadable files, unknown keys or bad values.
  """
  flags = {k: v for k, v in (flags or {}).items() if v is not None}
  env = environment_overrides(os.environ if environ is None else environ)

  source = flags.get('config') or env.get('config')
  file_values: dict[str, dict[str, Any]] = {}
  if source:
    source = Path(source)
    if not source.exists():
      raise FileNotFoundError(f'config file {source} not found')
    file_values = read_config_file(source)

  overrides: dict[str, Any] = {}
  for key, converter in OVERRIDE_TYPES.items():
    if key in flags:
      overrides[key] = converter(str(flags[key]))
    elif key in env:
      try:
        overrides[key] = converter(env[key])
      except ValueError as error:
        raise exceptions.ConfigError(f'bad value {env[key]!r} ({error})',
                                     key=ENV_PREFIX + key.upper()) from error

  scheme_values = dict(file_values.get('scheme', {}))
  if 'seed' in overrides:
    scheme_values['seed'] = overrides['seed']
  tolerance_values = dict(file_values.get('tolerances', {}))
  tol_scale = overrides.get('tol_scale', tolerance_values.pop('tol_scale', 1.0))
  if not tol_scale > 0:
    raise exceptions.ConfigError(f'tolerance scale must be positive, got '
                                 f'{tol_scale}',
                                 key='tol_scale')
  tolerances = Tolerances(**tolerance_values).scaled(tol_scale)
  scheme = SchemeConfig(**scheme_values, tolerances=tolerances)

  invariant_values = file_values.get('invariants', {})
  output_values = file_values.get('output', {})
  settings = RunSettings(
      scheme=scheme,
      n_grid=invariant_values.get('n_grid', DEFAULT_N_GRID),
      order=invariant_values.get('order', DEFAULT_ORDER),
      out_dir=overrides.get('out_dir',
                            output_values.get('out_dir',
                                              RunSettings.out_dir)),
      log_level=overrides.get('log_level',
                              output_values.get('log_level', 'INFO')),
      tol_scale=tol_scale,
      source=source if source else None)
  logger.debug('settings resolved from %s', settings.source or 'defaults')
  return settings
