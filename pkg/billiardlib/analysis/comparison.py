from dataclasses import dataclass, field

import pandas as pd

from billiardlib.analysis import invariants
from billiardlib.common import common
from billiardlib.structures import enums
from billiardlib.structures.table_schema import CheckSchema


@dataclass
class TableComparison:
  """
  A class used to compare the invariants of two tables.

  Attributes:
      reference_report (invariants.InvariantReport): Report of table A.
      other_report (invariants.InvariantReport): Report of table B.
      relative_threshold (float): Relative difference accepted per invariant.
      congruence_threshold (float): Smallest congruence distance of a pair
        that is not congruent.
      _summary_results (pd.DataFrame): Cached side-by-side values.

  Methods:
      summary_results: Invariant values of both tables, one row per name.
      comparison_results: Pass/fail table of the invariant checks.
  """
  reference_report: invariants.InvariantReport
  other_report: invariants.InvariantReport
  relative_threshold: float = 1e-4
  congruence_threshold: float = 1e-7
  _summary_results: pd.DataFrame = field(default_factory=pd.DataFrame)

  @property
  def summary_results(self) -> pd.DataFrame:
    """
    Get the invariant values of both tables.

    Returns:
        pd.DataFrame: Rows indexed by invariant name, columns A and B.
    """
    values_a = self.reference_report.values()
    values_b = self.other_report.values()
    self._summary_results = pd.DataFrame(
        {
            CheckSchema.VALUE_A: pd.Series(values_a),
            CheckSchema.VALUE_B: pd.Series(values_b)
        },
        columns=common.get_multiindex_multiple_columns(
            [CheckSchema.VALUE_A, CheckSchema.VALUE_B]))
    self._summary_results.index.name = CheckSchema.INDEX
    return self._summary_results

  def comparison_results(self) -> pd.DataFrame:
    """
    Get the pass/fail table of the comparison.

    Each invariant passes when its relative difference is within the
    threshold. The congruence row is flagged, without failing, when the two
    tables are congruent.

    Returns:
        pd.DataFrame: Values, differences, thresholds and a status per check.
    """
    summary = self.summary_results
    rows = []
    for name, (value_a, value_b) in zip(summary.index, summary.to_numpy()):
      difference = common.relative_difference(value_a, value_b)
      status = (enums.CheckStatus.PASS if difference <= self.relative_threshold
                else enums.CheckStatus.FAIL)
      rows.append((name, value_a, value_b, difference, self.relative_threshold,
                   status.value))
    distance = self.reference_report.congruence
    status = (enums.CheckStatus.PASS if distance >= self.congruence_threshold
              else enums.CheckStatus.CONGRUENT)
    rows.append(('congruence_distance', 0.0, distance, distance,
                 self.congruence_threshold, status.value))
    return checks_frame(rows)

  @property
  def passed(self) -> bool:
    statuses = self.comparison_results()[CheckSchema.STATUS]
    return bool((statuses != enums.CheckStatus.FAIL.value).all())


def checks_frame(rows: list[tuple]) -> pd.DataFrame:
  """Build a verification table from (name, a, b, diff, threshold, status)."""
  frame = pd.DataFrame([row[1:] for row in rows],
                       index=pd.Index([row[0] for row in rows],
                                      name=CheckSchema.INDEX),
                       columns=common.get_multiindex_multiple_columns([
                           CheckSchema.VALUE_A, CheckSchema.VALUE_B,
                           CheckSchema.DIFF, CheckSchema.THRESHOLD,
                           CheckSchema.STATUS
                       ]))
  return frame
