from typing import Protocol

import numpy as np
import numpy.typing as npt

ArrayLike = float | npt.NDArray[np.float64]


class ArcProfile(Protocol):
  """
  A curvature-versus-arclength description of a planar arc.

  Attributes:
      length (float): Arclength of the arc.

  Methods:
      kappa(s) -> ArrayLike:
          Curvature at arclength s.
      kappa_prime(s) -> ArrayLike:
          Derivative of the curvature with respect to arclength.
      tangent_angle(s) -> ArrayLike:
          Integral of the curvature from 0 to s.
      breakpoints() -> np.ndarray:
          Arclengths where the profile changes character.
  """

  @property
  def length(self) -> float:
    """
    Get the arclength of the arc.

    Returns:
        float: The arclength.
    """
    ...

  def kappa(self, s: ArrayLike) -> ArrayLike:
    """
    Evaluate the curvature.

    Args:
        s (ArrayLike): Arclength(s) in [0, length].

    Returns:
        ArrayLike: The curvature at s.
    """
    ...

  def kappa_prime(self, s: ArrayLike) -> ArrayLike:
    """
    Evaluate the arclength derivative of the curvature.

    Args:
        s (ArrayLike): Arclength(s) in [0, length].

    Returns:
        ArrayLike: dk/ds at s.
    """
    ...

  def tangent_angle(self, s: ArrayLike) -> ArrayLike:
    """
    Evaluate the tangent angle in the local frame of the arc.

    Args:
        s (ArrayLike): Arclength(s) in [0, length].

    Returns:
        ArrayLike: The integral of the curvature over [0, s].
    """
    ...

  def breakpoints(self) -> np.ndarray:
    """
    Get the arclengths where quadrature panels should be split.

    Returns:
        np.ndarray: Sorted breakpoints including 0 and length.
    """
    ...


class BoundaryCurve(Protocol):
  """
  A convex curve a billiard ball can bounce on.

  Closed tables and open building blocks both implement it; the billiard
  map only needs points, tangents and curvature along the arclength.

  Attributes:
      length (float): Parameter range [0, length] of the curve.
      closed (bool): True for a table, False for a single open block.
  """

  @property
  def length(self) -> float:
    ...

  @property
  def closed(self) -> bool:
    ...

  def point(self, s: ArrayLike) -> np.ndarray:
    """
    Evaluate boundary points.

    Args:
        s (ArrayLike): Arclength(s); any real value for closed curves.

    Returns:
        np.ndarray: Points with a trailing axis of size 2.
    """
    ...

  def tangent_angle(self, s: ArrayLike) -> ArrayLike:
    """
    Evaluate the unwrapped tangent angle.

    Returns:
        ArrayLike: Angle that grows by 2*pi per loop on closed curves.
    """
    ...

  def kappa(self, s: ArrayLike) -> ArrayLike:
    ...
