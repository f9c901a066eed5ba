import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
  """
  Numerical tolerances used across the library.

  Relative entries are multiplied by a natural length at the point of use
  (block length `a` or table length `l0`).

  Attributes:
      geometry (float): Absolute accuracy of the reconstructed arc points.
      symmetry (float): Allowed |k(s) - k(a - s)| of a building block.
      closure (float): Turning and endpoint closure of a glued table.
      root_rel (float): Chord root-finding tolerance, times l0.
      match_rel (float): Midpoint residual accepted as a match, times a.
      reverify_rel (float): Residual accepted when re-verifying old matches.
      orbit_closure (float): Closure residual of a matched closed orbit.
      reflection (float): Reflection-law residual at any bounce.
      constraint (float): Turning and chord preservation of a perturbation.
      convexity_floor (float): Minimum curvature as a fraction of the base.
      ngon_step_rel (float): Newton step size signalling convergence, times l0.
      conditioning_limit (float): Largest accepted normal-system condition.
      non_congruence (float): Smallest congruence distance of a valid pair.
      max_bounces (int): Bounce cap of a single wall shot.
      max_sweeps (int): Iteration cap of the n-gon optimiser.
  """
  geometry: float = 1e-12
  symmetry: float = 1e-12
  closure: float = 1e-10
  root_rel: float = 1e-13
  match_rel: float = 1e-9
  reverify_rel: float = 1e-8
  orbit_closure: float = 1e-9
  reflection: float = 1e-10
  constraint: float = 1e-12
  convexity_floor: float = 0.2
  ngon_step_rel: float = 1e-12
  conditioning_limit: float = 1e12
  non_congruence: float = 1e-7
  max_bounces: int = 1_000_000
  max_sweeps: int = 10_000

  _UNSCALED = ('convexity_floor', 'conditioning_limit', 'non_congruence',
               'max_bounces', 'max_sweeps')

  def scaled(self, factor: float) -> 'Tolerances':
    """
    Multiply every accuracy tolerance by a global factor.

    Floors, limits and caps are not accuracy targets and stay unchanged.

    Args:
        factor (float): The multiplier, as given by `--tol-scale`.

    Returns:
        Tolerances: A new set of tolerances.
    """
    if factor <= 0:
      raise ValueError(f'tolerance scale must be positive, got {factor}')
    changes = {
        f.name: getattr(self, f.name) * factor
        for f in dataclasses.fields(self)
        if f.name not in self._UNSCALED
    }
    return dataclasses.replace(self, **changes)

  def as_dict(self) -> dict[str, float]:
    return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()
