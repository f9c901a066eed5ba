from enum import Enum, IntEnum, StrEnum, auto


class ExitCode(IntEnum):
  """
  Process exit codes of the command line interface.

  Every error raised by the library maps to exactly one member, so batch
  users can tell failures apart without parsing the diagnostic text.
  """
  OK = 0
  FAILURE = 1
  USAGE = 2
  CONFIG = 3
  PRECONDITION = 4
  DOMAIN = 5
  CLOSURE = 6
  CONSTRAINT_SOLVE = 7
  CONVEXITY = 8
  ESCAPED_WALL = 9
  ITERATION_CAP = 10
  CLOSURE_FAILURE = 11
  NO_CONVERGENCE = 12
  ILL_CONDITIONED = 13
  NO_DISCONTINUITY = 14
  NO_ODD_JUMP = 15
  SUPPORT_EXHAUSTED = 16
  INVALID_PERMUTATION = 17
  CONGRUENT_PAIR = 18
  SERIALIZATION = 19
  VERIFY_FAILED = 20


class Orientation(Enum):
  """
  Direction in which a table boundary is traversed when comparing profiles.

  Attributes:
      FORWARD (Enum): Same orientation as the reference table.
      REVERSED (Enum): Opposite orientation (mirror image of the table).
  """
  FORWARD = 1
  REVERSED = -1

  @property
  def sign(self) -> int:
    return self.value


class PermutationForm(StrEnum):
  """
  Shapes of a block permutation that only relabel the same table.

  A permutation of one of these forms glues the blocks into a table congruent
  to the unglued order, so it cannot produce a counterexample.
  """
  ROTATION = auto()
  REFLECTION = auto()


class CheckStatus(StrEnum):
  """Outcome of a single row of a verification table."""
  PASS = 'pass'
  FAIL = 'fail'
  CONGRUENT = 'congruent - not a counterexample'


class Command(StrEnum):
  """Sub-commands of the command line interface."""
  CONSTRUCT = auto()
  VERIFY = auto()
  INVARIANTS = auto()
  ORBITS = auto()
  RENDER = auto()
  ESTIMATES = auto()


class Artifact(Enum):
  """
  Files written by the construct command.

  Each member holds the default file name and a short description used in the
  run manifest.
  """
  TABLE_A = 'table_a.yaml', 'blocks glued in natural order'
  TABLE_B = 'table_b.yaml', 'blocks glued in permuted order'
  CERTIFICATES = 'certificates.csv', 'one row per matched block and round'
  RUN_LOG = 'run.log', 'log of the construction run'
  MANIFEST = 'manifest.yaml', 'configuration echo and artifact index'

  @property
  def filename(self) -> str:
    return self.value[0]

  @property
  def description(self) -> str:
    return self.value[1]
