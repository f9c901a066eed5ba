import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from billiardlib.utillib import functions


@dataclass(frozen=True)
class RigidMotion:
  """
  Orientation-preserving isometry p -> R(rotation) p + translation.

  Attributes:
      rotation (float): Rotation angle in radians (not wrapped).
      translation (tuple[float, float]): Translation vector.
  """
  rotation: float = 0.0
  translation: tuple[float, float] = (0.0, 0.0)

  def __post_init__(self) -> None:
    object.__setattr__(self, 'translation',
                       tuple(float(v) for v in self.translation))

  @classmethod
  def identity(cls) -> 'RigidMotion':
    return cls()

  def apply(self, points: npt.ArrayLike) -> np.ndarray:
    return functions.rotate(np.asarray(points, dtype=float),
                            self.rotation) + np.asarray(self.translation)

  def compose(self, inner: 'RigidMotion') -> 'RigidMotion':
    """The motion `self` applied after `inner`."""
    moved = self.apply(np.asarray(inner.translation))
    return RigidMotion(self.rotation + inner.rotation, (moved[0], moved[1]))

  def distance_from_identity(self) -> tuple[float, float]:
    """Wrapped rotation angle and translation length."""
    return (abs(functions.wrap_angle(self.rotation)),
            math.hypot(*self.translation))
