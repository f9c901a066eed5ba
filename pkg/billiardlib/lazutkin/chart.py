"""
The Lazutkin coordinates of a table.

With curvature k, the chart is x(s) = C * int_0^s k^(2/3) and, for the angle
phi, y = 4 C k(s)^(-1/3) sin(phi / 2), where C normalises x(l0) = 1. Glancing
orbits move by about y in x per bounce and keep y almost constant.
"""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import integrate, interpolate

from billiardlib.common import common
from billiardlib.dynamics.billiard import PhaseState
from billiardlib.kernel.block import BuildingBlock
from billiardlib.kernel.table import BilliardTable
from billiardlib.structures import exceptions, protocols
from billiardlib.utillib import functions

logger = logging.getLogger(__name__)

INVERSE_KNOTS = 2**12 + 1
NEWTON_POLISH = 2
QUAD_TOL = 1e-13


def lazutkin_density(curve: protocols.BoundaryCurve,
                     s: npt.ArrayLike) -> float | np.ndarray:
  """The integrand k(s)^(2/3)."""
  return common.as_output(np.asarray(curve.kappa(s))**(2.0 / 3.0), s)


def curve_breakpoints(curve: protocols.BoundaryCurve) -> np.ndarray:
  """Points where the curvature is only piecewise smooth."""
  if isinstance(curve, BuildingBlock):
    return curve.profile.breakpoints()
  return curve.breakpoints()


@dataclass(frozen=True)
class LazutkinState:
  """
  A phase point in Lazutkin coordinates.

  Attributes:
      x (float): Normalised position, lifted to the real line.
      y (float): Normalised angle variable, > 0.
  """
  x: float
  y: float


@dataclass(frozen=True)
class LazutkinChart:
  """
  The monotone map x(s) of a table and its inverse.

  Attributes:
      c_omega (float): Normalising constant C.
      length (float): Table length l0.
      primitive (PiecewiseChebyshev): s -> int_0^s k^(2/3) on [0, l0].
      inverse (PchipInterpolator): Monotone first guess for s(x).
      curve (BoundaryCurve): The table the chart belongs to.
  """
  c_omega: float
  length: float
  primitive: functions.PiecewiseChebyshev
  inverse: interpolate.PchipInterpolator
  curve: protocols.BoundaryCurve

  def x_of_s(self, s: npt.ArrayLike) -> float | np.ndarray:
    s_arr = np.asarray(s, dtype=float)
    loops = np.floor(s_arr / self.length)
    wrapped = s_arr - loops * self.length
    values = loops + self.c_omega * np.asarray(self.primitive(wrapped))
    return common.as_output(values, s)

  def s_of_x(self, x: npt.ArrayLike) -> float | np.ndarray:
    """Inverse of `x_of_s`: PCHIP guess polished by Newton steps."""
    x_arr = np.asarray(x, dtype=float)
    loops = np.floor(x_arr)
    fraction = x_arr - loops
    s = np.clip(self.inverse(fraction), 0.0, self.length)
    for _ in range(NEWTON_POLISH):
      error = self.c_omega * np.asarray(self.primitive(s)) - fraction
      slope = self.c_omega * np.asarray(lazutkin_density(self.curve, s))
      s = np.clip(s - error / slope, 0.0, self.length)
    return common.as_output(s + loops * self.length, x)


@functools.lru_cache(maxsize=32)
def build_chart(table: BilliardTable) -> LazutkinChart:
  """
  Build the Lazutkin chart of a table.

  Args:
      table (BilliardTable): The table.

  Returns:
      LazutkinChart: The chart, with x(0) = 0 and x(l0) = 1.
  """
  primitive = functions.PiecewiseChebyshev.fit(
      lambda s: lazutkin_density(table, s),
      table.breakpoints()).antiderivative()
  total = primitive.total()
  c_omega = 1.0 / total
  knots = np.linspace(0.0, table.length, INVERSE_KNOTS)
  x_knots = c_omega * np.asarray(primitive(knots))
  x_knots[-1] = 1.0
  inverse = interpolate.PchipInterpolator(x_knots, knots)
  logger.debug('Lazutkin chart: C = %.17g over %d panels', c_omega,
               primitive.panel_count)
  return LazutkinChart(c_omega, table.length, primitive, inverse, table)


def to_lazutkin(chart: LazutkinChart, table: BilliardTable,
                state: PhaseState) -> LazutkinState:
  kappa = float(table.kappa(state.s))
  y = 4.0 * chart.c_omega * kappa**(-1.0 / 3.0) * math.sin(0.5 * state.phi)
  return LazutkinState(float(chart.x_of_s(state.s)), y)


def from_lazutkin(chart: LazutkinChart, table: BilliardTable,
                  state: LazutkinState) -> PhaseState:
  """
  Map Lazutkin coordinates back to (s, phi), with s reduced mod l0.

  Raises:
      PreconditionError: If y is too large for any angle at that point.
  """
  s = float(chart.s_of_x(state.x))
  kappa = float(table.kappa(s))
  ratio = state.y * kappa**(1.0 / 3.0) / (4.0 * chart.c_omega)
  if not 0.0 < ratio <= 1.0:
    raise exceptions.PreconditionError(
        f'y={state.y!r} has no angle at s={s!r}')
  return PhaseState(math.fmod(s, table.length), 2.0 * math.asin(ratio))


def lazutkin_perimeter(curve: protocols.BoundaryCurve) -> float:
  """
  Unnormalised Lazutkin perimeter int_0^a k^(2/3) ds of a block or table.

  The integral is split at the curvature breakpoints and each smooth piece
  is integrated adaptively.
  """
  edges = curve_breakpoints(curve)
  pieces = []
  for left, right in zip(edges[:-1], edges[1:]):
    value, _ = integrate.quad(lambda s: lazutkin_density(curve, s),
                              left,
                              right,
                              epsabs=QUAD_TOL * (right - left),
                              epsrel=QUAD_TOL,
                              limit=200)
    pieces.append(value)
  return math.fsum(pieces)
