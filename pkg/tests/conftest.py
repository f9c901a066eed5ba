import math

import numpy as np
import pytest

from billiardlib.construction.scheme import SchemeConfig, run_scheme
from billiardlib.kernel.block import circle_block
from billiardlib.utillib import sample_tables

SEED = 20240611


@pytest.fixture
def rng() -> np.random.Generator:
  return np.random.default_rng(SEED)


@pytest.fixture(scope='session')
def circle_table():
  return sample_tables.unit_circle_table(4)


@pytest.fixture(scope='session')
def oval_table():
  return sample_tables.oval_table()


@pytest.fixture(scope='session')
def quarter_block():
  return circle_block(0.5 * math.pi)


@pytest.fixture(scope='session')
def default_run():
  """The default construction, shared by the slow end-to-end tests."""
  return run_scheme(SchemeConfig())
