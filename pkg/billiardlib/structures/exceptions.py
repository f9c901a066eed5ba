"""Exception hierarchy shared by every billiardlib module."""
from typing import Sequence

import numpy as np

from billiardlib.structures.enums import ExitCode


class BilliardLibError(Exception):
  """
  Base class of all errors raised by billiardlib.

  Attributes:
      exit_code (ExitCode): The process exit code the CLI reports for it.
  """
  exit_code: ExitCode = ExitCode.FAILURE


class PreconditionError(BilliardLibError, ValueError):
  """An argument violates the documented precondition of an operation."""
  exit_code = ExitCode.PRECONDITION


class DomainError(PreconditionError):
  """An arclength lies outside the parameter interval of a curve."""
  exit_code = ExitCode.DOMAIN

  def __init__(self, s: float, length: float) -> None:
    super().__init__(f'arclength {s!r} outside [0, {length!r}]')
    self.s = s
    self.length = length


class ClosureError(BilliardLibError):
  """
  Glued blocks do not form a closed curve.

  Attributes:
      turning_defect (float): Total turning minus 2*pi.
      endpoint_gap (float): Distance between the chain end and its start.
  """
  exit_code = ExitCode.CLOSURE

  def __init__(self, turning_defect: float, endpoint_gap: float) -> None:
    super().__init__(f'blocks do not close: turning defect '
                     f'{turning_defect:.3e}, endpoint gap {endpoint_gap:.3e}')
    self.turning_defect = turning_defect
    self.endpoint_gap = endpoint_gap


class ConstraintSolveError(BilliardLibError):
  """The turning and chord constraints of a perturbation could not be met."""
  exit_code = ExitCode.CONSTRAINT_SOLVE


class ConvexityError(BilliardLibError):
  """
  A curvature profile dips below its convexity floor.

  Attributes:
      min_kappa (float): Smallest curvature found.
      floor (float): The floor it had to stay above.
  """
  exit_code = ExitCode.CONVEXITY

  def __init__(self, min_kappa: float, floor: float) -> None:
    super().__init__(
        f'minimum curvature {min_kappa:.6g} not above floor {floor:.6g}')
    self.min_kappa = min_kappa
    self.floor = floor


class EscapedWall(BilliardLibError):
  """
  The forward ray leaves an open block through one of its ends.

  Attributes:
      exit_arclength (float): Arclength of the last bounce.
      exit_point (np.ndarray): Point of the last bounce.
      exit_angle (float): Angle between the escaping chord and the tangent.
  """
  exit_code = ExitCode.ESCAPED_WALL

  def __init__(self, exit_arclength: float, exit_point: np.ndarray,
               exit_angle: float) -> None:
    super().__init__(
        f'ray escaped the wall from s={exit_arclength:.17g} '
        f'with angle {exit_angle:.17g}')
    self.exit_arclength = exit_arclength
    self.exit_point = exit_point
    self.exit_angle = exit_angle


class IterationCap(BilliardLibError):
  """A shot needed more bounces than the configured cap."""
  exit_code = ExitCode.ITERATION_CAP


class ClosureFailure(BilliardLibError):
  """
  An orbit launched with a certified angle does not close.

  Attributes:
      theta (float): The offending angle.
      residual (float): Closure residual in (s, phi).
  """
  exit_code = ExitCode.CLOSURE_FAILURE

  def __init__(self, theta: float, residual: float) -> None:
    super().__init__(f'orbit with theta={theta:.17g} does not close '
                     f'(residual {residual:.3e})')
    self.theta = theta
    self.residual = residual


class NoConvergence(BilliardLibError):
  """An iterative optimiser hit its iteration cap."""
  exit_code = ExitCode.NO_CONVERGENCE


class IllConditioned(BilliardLibError):
  """
  A least squares design is too badly conditioned to trust.

  Attributes:
      condition (float): Condition estimate of the normal system.
  """
  exit_code = ExitCode.ILL_CONDITIONED

  def __init__(self, condition: float, limit: float) -> None:
    super().__init__(
        f'normal system condition {condition:.3e} exceeds {limit:.1e}; '
        'widen the n range or lower the fit degree')
    self.condition = condition
    self.limit = limit


class NoDiscontinuity(BilliardLibError):
  """The half-wall bounce count is constant over a perturbation sweep."""
  exit_code = ExitCode.NO_DISCONTINUITY


class NoOddJump(BilliardLibError):
  """Every jump of a sweep failed to land a bounce on the block midpoint."""
  exit_code = ExitCode.NO_ODD_JUMP


class SupportExhausted(BilliardLibError):
  """No support interval of the minimum width avoids the recorded bounces."""
  exit_code = ExitCode.SUPPORT_EXHAUSTED


class InvalidPermutation(PreconditionError):
  """
  A gluing permutation is not usable for a counterexample.

  Attributes:
      permutation (tuple[int, ...]): The rejected permutation.
      form (str): Why it was rejected.
  """
  exit_code = ExitCode.INVALID_PERMUTATION

  def __init__(self, permutation: Sequence[int], form: str) -> None:
    super().__init__(f'permutation {tuple(permutation)} rejected: {form}')
    self.permutation = tuple(permutation)
    self.form = form


class CongruentPairError(BilliardLibError):
  """The two glued tables are congruent, so they are no counterexample."""
  exit_code = ExitCode.CONGRUENT_PAIR

  def __init__(self, distance: float, threshold: float) -> None:
    super().__init__(f'congruence distance {distance:.3e} below '
                     f'non-congruence threshold {threshold:.1e}')
    self.distance = distance
    self.threshold = threshold


class ConfigError(BilliardLibError):
  """
  A configuration file or override could not be used.

  Attributes:
      key (str): The offending key, empty when the file itself is malformed.
      line (int | None): 1-based line number in the file, when known.
  """
  exit_code = ExitCode.CONFIG

  def __init__(self, message: str, key: str = '',
               line: int | None = None) -> None:
    where = f' (line {line})' if line is not None else ''
    label = f'{key}: ' if key else ''
    super().__init__(f'{label}{message}{where}')
    self.key = key
    self.line = line


class SerializationError(BilliardLibError):
  """A table, certificate or orbit file is malformed."""
  exit_code = ExitCode.SERIALIZATION
