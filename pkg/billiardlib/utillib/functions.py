import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt
from numpy.polynomial import chebyshev, legendre

from billiardlib.common import common

logger = logging.getLogger(__name__)

VectorFunction = Callable[[np.ndarray], np.ndarray]

CHEBYSHEV_DEGREE = 32
CHEBYSHEV_TAIL = 3
CHEBYSHEV_TOL = 1e-14
MAX_SPLIT_DEPTH = 40


@dataclass(frozen=True)
class PiecewiseChebyshev:
  """
  A piecewise Chebyshev approximation on consecutive panels.

  Attributes:
      breaks (np.ndarray): Panel edges, strictly increasing.
      coeffs (np.ndarray): One row of Chebyshev coefficients per panel, in the
        panel-local variable t in [-1, 1].

  Methods:
      fit: Adaptively approximate a vectorised function.
      antiderivative: Primitive vanishing at the first break.
      __call__: Evaluate at scalar or array arguments.
  """
  breaks: np.ndarray
  coeffs: np.ndarray

  @classmethod
  def fit(cls,
          func: VectorFunction,
          breaks: npt.ArrayLike,
          degree: int = CHEBYSHEV_DEGREE,
          tol: float = CHEBYSHEV_TOL) -> 'PiecewiseChebyshev':
    """
    Approximate `func` on the panels given by `breaks`, bisecting any panel
    whose trailing coefficients exceed `tol` times the function scale.

    Args:
        func (VectorFunction): Function accepting an array of abscissae.
        breaks (npt.ArrayLike): Initial panel edges.
        degree (int, optional): Polynomial degree per panel. Defaults to 32.
        tol (float, optional): Relative tail tolerance. Defaults to 1e-14.

    Returns:
        PiecewiseChebyshev: The approximation.
    """
    edges = np.unique(np.asarray(breaks, dtype=float))

    def panel_coefficients(left: float, right: float) -> np.ndarray:
      middle, half = 0.5 * (left + right), 0.5 * (right - left)
      return chebyshev.chebinterpolate(
          lambda t: np.asarray(func(middle + half * t), dtype=float), degree)

    first_pass = [
        panel_coefficients(l, r) for l, r in zip(edges[:-1], edges[1:])
    ]
    scale = max(1e-300, max(np.abs(c).sum() for c in first_pass))

    accepted: list[tuple[float, float, np.ndarray]] = []
    pending = [(l, r, c, 0)
               for l, r, c in zip(edges[:-1], edges[1:], first_pass)]
    pending.reverse()
    while pending:
      left, right, coeffs, depth = pending.pop()
      tail = np.max(np.abs(coeffs[-CHEBYSHEV_TAIL:]))
      if tail <= tol * scale or depth >= MAX_SPLIT_DEPTH:
        if depth >= MAX_SPLIT_DEPTH:
          logger.debug('panel [%g, %g] kept at split cap, tail %.2e', left,
                       right, tail)
        accepted.append((left, right, coeffs))
        continue
      middle = 0.5 * (left + right)
      pending.append((middle, right, panel_coefficients(middle, right),
                      depth + 1))
      pending.append((left, middle, panel_coefficients(left, middle),
                      depth + 1))

    panel_edges = np.array([accepted[0][0]] + [r for _, r, _ in accepted])
    return cls(breaks=panel_edges,
               coeffs=np.vstack([c for _, _, c in accepted]))

  @property
  def panel_count(self) -> int:
    return len(self.breaks) - 1

  def antiderivative(self) -> 'PiecewiseChebyshev':
    """
    Primitive of the approximation, zero at the first break and continuous
    across panels.

    Returns:
        PiecewiseChebyshev: The primitive, one degree higher.
    """
    half_widths = 0.5 * np.diff(self.breaks)
    integrated = np.vstack([
        chebyshev.chebint(c, m=1, lbnd=-1, scl=h)
        for c, h in zip(self.coeffs, half_widths)
    ])
    panel_integrals = integrated.sum(axis=1)
    offsets = np.concatenate([[0.0], np.cumsum(panel_integrals)[:-1]])
    integrated[:, 0] += offsets
    return PiecewiseChebyshev(breaks=self.breaks.copy(), coeffs=integrated)

  def total(self) -> float:
    """Value at the last break."""
    return float(self(self.breaks[-1]))

  def __call__(self, s: npt.ArrayLike) -> float | np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    idx = np.clip(
        np.searchsorted(self.breaks, s_arr, side='right') - 1, 0,
        self.panel_count - 1)
    left = self.breaks[idx]
    right = self.breaks[idx + 1]
    t = np.clip((2.0 * s_arr - left - right) / (right - left), -1.0, 1.0)
    values = chebyshev.chebval(t.ravel(),
                               self.coeffs[idx.ravel()].T,
                               tensor=False)
    return common.as_output(np.reshape(values, s_arr.shape), s)


def composite_gauss_legendre(edges: npt.ArrayLike,
                             order: int = 24) -> tuple[np.ndarray, np.ndarray]:
  """
  Nodes and weights of a composite Gauss-Legendre rule.

  Args:
      edges (npt.ArrayLike): Panel edges, increasing.
      order (int, optional): Nodes per panel. Defaults to 24.

  Returns:
      tuple[np.ndarray, np.ndarray]: Flattened nodes and weights.
  """
  edges = np.unique(np.asarray(edges, dtype=float))
  nodes, weights = legendre.leggauss(order)
  centres = 0.5 * (edges[:-1] + edges[1:])
  halves = 0.5 * np.diff(edges)
  x = (centres[:, None] + halves[:, None] * nodes[None, :]).ravel()
  w = (halves[:, None] * weights[None, :]).ravel()
  return x, w


def refine_edges(edges: npt.ArrayLike, pieces: int) -> np.ndarray:
  """Split every interval between consecutive edges into `pieces` parts."""
  edges = np.unique(np.asarray(edges, dtype=float))
  fractions = np.linspace(0.0, 1.0, pieces + 1)[:-1]
  inner = (edges[:-1, None] + np.diff(edges)[:, None] * fractions).ravel()
  return np.append(inner, edges[-1])


def wrap_angle(angle: npt.ArrayLike) -> float | np.ndarray:
  """Wrap angles into (-pi, pi]."""
  wrapped = np.pi - np.mod(np.pi - np.asarray(angle, dtype=float), 2 * np.pi)
  return common.as_output(wrapped, angle)


def cross2(u: np.ndarray, v: np.ndarray) -> float | np.ndarray:
  """z-component of the cross product of 2-vectors (last axis)."""
  return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def unit_vector(angle: npt.ArrayLike) -> np.ndarray:
  angle = np.asarray(angle, dtype=float)
  return np.stack([np.cos(angle), np.sin(angle)], axis=-1)


def rotate(points: np.ndarray, angle: float) -> np.ndarray:
  """Rotate 2-vectors (last axis) counter-clockwise by `angle`."""
  c, s = np.cos(angle), np.sin(angle)
  return np.stack([c * points[..., 0] - s * points[..., 1],
                   s * points[..., 0] + c * points[..., 1]],
                  axis=-1)
