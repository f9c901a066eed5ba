"""
Reading and writing tables, certificates, orbits and reports.

Tables and reports are YAML documents; tabular data is CSV with a two-row
(name, unit) header. Every float is written with 17 significant digits, so
files parse back to the same doubles and re-serialise byte for byte.
"""
import logging
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd
import yaml

from billiardlib.common import common
from billiardlib.construction.scheme import MatchCertificate
from billiardlib.dynamics.billiard import Orbit, PhaseState
from billiardlib.kernel.block import BuildingBlock
from billiardlib.kernel.profile import Bump, CurvatureProfile
from billiardlib.kernel.table import BilliardTable, close_table
from billiardlib.structures import exceptions
from billiardlib.structures.settings import DEFAULT_TOLERANCES, Tolerances
from billiardlib.structures.table_schema import CertificateSchema, OrbitSchema

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
TABLE_KIND = 'billiard_table'
ORBIT_HEADER = '# '


class _Dumper(yaml.SafeDumper):
  pass


def _represent_float(dumper: yaml.SafeDumper, value: float) -> yaml.Node:
  return dumper.represent_scalar('tag:yaml.org,2002:float',
                                 common.format_float(value))


_Dumper.add_representer(float, _represent_float)
_Dumper.add_representer(np.float64, _represent_float)


def dump_yaml(document: dict[str, Any]) -> str:
  return yaml.dump(document,
                   Dumper=_Dumper,
                   sort_keys=False,
                   default_flow_style=None)


def write_yaml(path: Path, document: dict[str, Any]) -> Path:
  common.create_path(path.parent)
  path.write_text(dump_yaml(document), encoding='utf-8')
  return path


def read_yaml(path: Path) -> dict[str, Any]:
  try:
    document = yaml.safe_load(path.read_text(encoding='utf-8'))
  except yaml.YAMLError as error:
    raise exceptions.SerializationError(f'{path}: {error}') from error
  if not isinstance(document, dict):
    raise exceptions.SerializationError(f'{path}: expected a mapping')
  return document


def table_document(blocks: Sequence[BuildingBlock]) -> dict[str, Any]:
  """The YAML document of a table given by its blocks in gluing order."""
  return {
      'format_version': FORMAT_VERSION,
      'kind': TABLE_KIND,
      'blocks': [{
          'base': float(block.base),
          'length': float(block.length),
          'bumps': [[float(b.center),
                     float(b.halfwidth),
                     float(b.amplitude)] for b in block.profile.bumps],
      } for block in blocks],
  }


def _block_from_entry(entry: Any, position: int) -> BuildingBlock:
  try:
    bumps = tuple(
        Bump(float(c), float(h), float(a)) for c, h, a in entry['bumps'])
    profile = CurvatureProfile(float(entry['base']), bumps,
                               float(entry['length']))
  except (KeyError, TypeError, ValueError) as error:
    if isinstance(error, exceptions.BilliardLibError):
      raise
    raise exceptions.SerializationError(
        f'block {position}: malformed entry ({error})') from error
  return BuildingBlock(profile)


def blocks_from_document(document: dict[str, Any]) -> list[BuildingBlock]:
  if document.get('format_version') != FORMAT_VERSION:
    raise exceptions.SerializationError(
        f'unsupported format_version {document.get("format_version")!r}')
  if document.get('kind') != TABLE_KIND or not isinstance(
      document.get('blocks'), list):
    raise exceptions.SerializationError('not a billiard table document')
  return [
      _block_from_entry(entry, i)
      for i, entry in enumerate(document['blocks'], start=1)
  ]


def write_table(path: Path, table: BilliardTable) -> Path:
  return write_yaml(path, table_document(table.blocks))


def read_table(path: Path,
               tolerances: Tolerances = DEFAULT_TOLERANCES) -> BilliardTable:
  """
  Read a table file and glue its blocks.

  Raises:
      SerializationError: If the document is malformed.
      ClosureError: If the blocks do not close up.
  """
  return close_table(blocks_from_document(read_yaml(path)), tolerances)


CERTIFICATE_COLUMNS = [
    CertificateSchema.ROUND, CertificateSchema.BLOCK, CertificateSchema.THETA,
    CertificateSchema.DELTA_STAR, CertificateSchema.P,
    CertificateSchema.RESIDUAL, CertificateSchema.SUPPORT_LO,
    CertificateSchema.SUPPORT_HI, CertificateSchema.C0_CHANGE
]


def certificates_frame(certificates: Sequence[MatchCertificate]
                      ) -> pd.DataFrame:
  rows = [(c.round, c.block_index, c.theta, c.delta_star, c.p, c.residual,
           c.support[0], c.support[1], c.curvature_change)
          for c in certificates]
  return pd.DataFrame(
      rows,
      columns=common.get_multiindex_multiple_columns(CERTIFICATE_COLUMNS))


def write_frame(path: Path, frame: pd.DataFrame, index: bool = False) -> Path:
  common.create_path(path.parent)
  frame.to_csv(path, index=index, float_format=common.FLOAT_FORMAT)
  return path


def read_frame(path: Path, skiprows: int = 0) -> pd.DataFrame:
  try:
    return pd.read_csv(path,
                       header=[0, 1],
                       skiprows=skiprows,
                       float_precision='round_trip')
  except (pd.errors.ParserError, pd.errors.EmptyDataError,
          UnicodeDecodeError) as error:
    raise exceptions.SerializationError(f'{path}: {error}') from error


def write_certificates(path: Path,
                       certificates: Sequence[MatchCertificate]) -> Path:
  return write_frame(path, certificates_frame(certificates))


def read_certificates(path: Path) -> list[MatchCertificate]:
  frame = read_frame(path)
  missing = [c for c in CERTIFICATE_COLUMNS if c not in frame.columns]
  if missing:
    raise exceptions.SerializationError(
        f'{path}: missing columns {[name for name, _ in missing]}')
  certificates = []
  for _, row in frame.iterrows():
    certificates.append(
        MatchCertificate(round=int(row[CertificateSchema.ROUND]),
                         block_index=int(row[CertificateSchema.BLOCK]),
                         theta=float(row[CertificateSchema.THETA]),
                         delta_star=float(row[CertificateSchema.DELTA_STAR]),
                         p=int(row[CertificateSchema.P]),
                         residual=float(row[CertificateSchema.RESIDUAL]),
                         support=(float(row[CertificateSchema.SUPPORT_LO]),
                                  float(row[CertificateSchema.SUPPORT_HI])),
                         curvature_change=float(
                             row[CertificateSchema.C0_CHANGE])))
  return certificates


def orbit_frame(table: BilliardTable, orbit: Orbit) -> pd.DataFrame:
  """One row per bounce: s, phi, the bounce point and the outgoing chord."""
  s = np.array([state.s for state in orbit.states])
  points = table.point(s)
  return pd.DataFrame(
      {
          OrbitSchema.S: s,
          OrbitSchema.PHI: [state.phi for state in orbit.states],
          OrbitSchema.X: points[:, 0],
          OrbitSchema.Y: points[:, 1],
          OrbitSchema.CHORD: list(orbit.chords),
      },
      columns=common.get_multiindex_multiple_columns([
          OrbitSchema.S, OrbitSchema.PHI, OrbitSchema.X, OrbitSchema.Y,
          OrbitSchema.CHORD
      ]))


def write_orbit(path: Path, table: BilliardTable, orbit: Orbit) -> Path:
  """Write an orbit as CSV behind a '# period=... perimeter=...' line."""
  common.create_path(path.parent)
  header = (f'{ORBIT_HEADER}period={orbit.period} '
            f'perimeter={common.format_float(orbit.perimeter)} '
            f'closure_residual={common.format_float(orbit.closure_residual)}')
  body = orbit_frame(table, orbit).to_csv(index=False,
                                          float_format=common.FLOAT_FORMAT)
  path.write_text(header + '\n' + body, encoding='utf-8')
  return path


def read_orbit(path: Path) -> tuple[dict[str, float], pd.DataFrame]:
  """
  Read an orbit file.

  Returns:
      tuple[dict[str, float], pd.DataFrame]: The header values and the
        bounce table.
  """
  with path.open(encoding='utf-8') as handle:
    first = handle.readline().strip()
  if not first.startswith(ORBIT_HEADER):
    raise exceptions.SerializationError(f'{path}: missing orbit header line')
  header: dict[str, float] = {}
  for item in first[len(ORBIT_HEADER):].split():
    key, _, value = item.partition('=')
    try:
      header[key] = float(value)
    except ValueError as error:
      raise exceptions.SerializationError(
          f'{path}: bad header item {item!r}') from error
  return header, read_frame(path, skiprows=1)


def orbit_from_frame(header: dict[str, float], frame: pd.DataFrame) -> Orbit:
  s = frame[OrbitSchema.S].to_numpy(dtype=float)
  phis = frame[OrbitSchema.PHI].to_numpy(dtype=float)
  chords = frame[OrbitSchema.CHORD].to_numpy(dtype=float)
  return Orbit(tuple(PhaseState(float(a), float(b)) for a, b in zip(s, phis)),
               tuple(float(c) for c in chords),
               header.get('perimeter', math.fsum(chords)), True,
               int(header.get('period', len(s))),
               header.get('closure_residual', 0.0), s)


def report_document(report_a, report_b, n_grid: Sequence[int]) -> dict:
  """YAML document of an invariant comparison."""

  def one(report) -> dict:
    return {
        'ell0': report.ell0,
        'ell1_quad': report.ell1_quad,
        'ell2_quad': report.ell2_quad,
        'fit_ell0': report.fit.ell0,
        'fit_c': list(report.fit.coefficients),
        'fit_residual': report.fit.residual,
        'fit_condition': report.fit.condition,
        'perimeters': {int(n): float(v) for n, v in report.perimeters.items()},
    }

  return {
      'format_version': FORMAT_VERSION,
      'n_grid': [int(n) for n in n_grid],
      'table_a': one(report_a),
      'table_b': one(report_b),
      'differences': {
          name: {
              'absolute': float(pair[0]),
              'relative': float(pair[1])
          } for name, pair in report_a.counterpart_diffs.items()
      },
      'congruence_distance': float(report_a.congruence),
  }


def manifest_document(config: dict, tolerances: Tolerances,
                      artifacts: dict[str, Path], timings: dict[str, float],
                      version: str) -> dict:
  """
  The run manifest; every artifact listed must already exist.

  Raises:
      SerializationError: If a listed artifact is missing.
  """
  for name, path in artifacts.items():
    if not path.exists():
      raise exceptions.SerializationError(
          f'artifact {name} missing at {path}')
  return {
      'format_version': FORMAT_VERSION,
      'tool': 'billiardlib',
      'version': version,
      'config': config,
      'tolerances': tolerances.as_dict(),
      'artifacts': {name: str(path) for name, path in artifacts.items()},
      'timings_seconds': {name: float(v) for name, v in timings.items()},
  }
