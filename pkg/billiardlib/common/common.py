import math
from pathlib import Path

import numpy as np
import pandas as pd

FLOAT_FORMAT = '%.17g'


def create_path(path_to_create: Path) -> None:
  path_to_create.mkdir(parents=True, exist_ok=True)


def get_multiindex_multiple_columns(
    list_columns: list[tuple[str, str]]) -> pd.MultiIndex:
  """
  Create a multiindex with the given list of columns.

  Args:
      list_columns (list[tuple[str, str]]): The list of columns.

  Returns:
      pd.MultiIndex: The multiindex with the list of columns.
  """
  return pd.MultiIndex.from_tuples(list_columns, names=['Parameters', 'Units'])


def format_float(value: float) -> str:
  """
  Format a float with 17 significant digits so it parses back exactly.

  The result always contains a decimal point, so YAML and CSV readers type
  it as a float rather than an integer.

  Args:
      value (float): The value to format.

  Returns:
      str: The formatted value.
  """
  if math.isnan(value):
    return '.nan'
  if math.isinf(value):
    return '.inf' if value > 0 else '-.inf'
  text = format(value, '.17g')
  if '.' in text:
    return text
  if 'e' in text:
    mantissa, exponent = text.split('e')
    return f'{mantissa}.0e{exponent}'
  return f'{text}.0'


def relative_difference(a: float, b: float) -> float:
  """
  Symmetric relative difference |a - b| / max(|a|, |b|), 0 when both are 0.
  """
  scale = max(abs(a), abs(b))
  if scale == 0:
    return 0.0
  return abs(a - b) / scale


def as_output(values: np.ndarray, like) -> float | np.ndarray:
  """Return a Python float when the input `like` was a scalar."""
  if np.ndim(like) == 0:
    return float(values)
  return values
