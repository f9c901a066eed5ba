import math

import numpy as np
import pytest

from billiardlib.construction.scheme import MatchCertificate
from billiardlib.dynamics import billiard
from billiardlib.io import serialization
from billiardlib.kernel.block import BumpLayout, perturb_block
from billiardlib.kernel.table import close_table
from billiardlib.structures import exceptions
from billiardlib.structures.table_schema import OrbitSchema
from billiardlib.utillib import sample_tables


@pytest.fixture(scope='module')
def bumped_table():
  blocks = sample_tables.unit_circle_blocks(4)
  blocks[1] = perturb_block(blocks[1], (0.2, 0.5), BumpLayout(), 0.03)
  blocks[3] = blocks[1]
  return close_table(blocks)


def test_table_file_is_stable(tmp_path, bumped_table):
  first = serialization.write_table(tmp_path / 'a.yaml', bumped_table)
  table = serialization.read_table(first)
  second = serialization.write_table(tmp_path / 'b.yaml', table)
  assert first.read_bytes() == second.read_bytes()
  assert table.blocks == bumped_table.blocks


def test_table_document_layout(bumped_table):
  document = serialization.table_document(bumped_table.blocks)
  assert document['format_version'] == 1
  assert document['kind'] == 'billiard_table'
  assert len(document['blocks']) == 4
  assert document['blocks'][0]['bumps'] == []
  assert len(document['blocks'][1]['bumps']) == 8
  text = serialization.dump_yaml(document)
  assert 'base: 1.0' in text


@pytest.mark.parametrize('document', [
    {
        'format_version': 2,
        'kind': 'billiard_table',
        'blocks': []
    },
    {
        'format_version': 1,
        'kind': 'something_else',
        'blocks': []
    },
    {
        'format_version': 1,
        'kind': 'billiard_table',
        'blocks': [{
            'base': 1.0
        }]
    },
])
def test_malformed_table_documents(document):
  with pytest.raises(exceptions.SerializationError):
    serialization.blocks_from_document(document)


def test_yaml_must_be_mapping(tmp_path):
  path = tmp_path / 'list.yaml'
  path.write_text('- 1\n- 2\n', encoding='utf-8')
  with pytest.raises(exceptions.SerializationError):
    serialization.read_yaml(path)


def test_open_table_file_fails_closure(tmp_path, quarter_block):
  path = serialization.write_yaml(
      tmp_path / 'open.yaml',
      serialization.table_document([quarter_block] * 3))
  with pytest.raises(exceptions.ClosureError):
    serialization.read_table(path)


def test_certificates_round_trip(tmp_path):
  certificates = [
      MatchCertificate(1, 1, 0.098174770424681035, 0.0123, 4, 3.1e-12,
                       (0.078539816339744828, 0.70685834705770345), 0.0049),
      MatchCertificate(1, 2, 0.098174770424681035, -0.004, 4, 0.0,
                       (0.1, 0.6), 0.0021),
  ]
  path = serialization.write_certificates(tmp_path / 'certificates.csv',
                                          certificates)
  assert serialization.read_certificates(path) == certificates


def test_certificates_missing_columns(tmp_path):
  path = tmp_path / 'bad.csv'
  path.write_text('round,block\n-,-\n1,1\n', encoding='utf-8')
  with pytest.raises(exceptions.SerializationError):
    serialization.read_certificates(path)


def test_orbit_file(tmp_path, circle_table):
  orbit = billiard.closed_orbit_from_match(circle_table, math.pi / 8)
  path = serialization.write_orbit(tmp_path / 'orbit.csv', circle_table, orbit)
  assert path.read_text(encoding='utf-8').startswith('# period=8 ')
  header, frame = serialization.read_orbit(path)
  assert header['period'] == 8
  assert header['perimeter'] == orbit.perimeter
  assert len(frame) == 8
  np.testing.assert_array_equal(frame[OrbitSchema.S].to_numpy(),
                                orbit.arclengths)
  restored = serialization.orbit_from_frame(header, frame)
  assert restored.period == orbit.period
  assert restored.chords == orbit.chords


def test_orbit_file_needs_header(tmp_path):
  path = tmp_path / 'orbit.csv'
  path.write_text('s,phi\nlength,rad\n0.0,0.1\n', encoding='utf-8')
  with pytest.raises(exceptions.SerializationError):
    serialization.read_orbit(path)


def test_manifest_lists_existing_files(tmp_path):
  present = tmp_path / 'table_a.yaml'
  present.write_text('{}\n', encoding='utf-8')
  tolerances = serialization.DEFAULT_TOLERANCES
  document = serialization.manifest_document({'seed': 0}, tolerances,
                                             {'table_a': present}, {}, '0.1.0')
  assert document['artifacts'] == {'table_a': str(present)}
  with pytest.raises(exceptions.SerializationError):
    serialization.manifest_document({}, tolerances,
                                    {'missing': tmp_path / 'nope.csv'}, {},
                                    '0.1.0')
