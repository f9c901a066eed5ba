class CertificateSchema:
  ROUND = 'round', '-'
  BLOCK = 'block', '-'
  THETA = 'theta', 'rad'
  DELTA_STAR = 'delta_star', '-'
  P = 'midpoint_bounce', '-'
  RESIDUAL = 'residual', 'length'
  SUPPORT_LO = 'support_lo', 'length'
  SUPPORT_HI = 'support_hi', 'length'
  C0_CHANGE = 'curvature_change', '1/length'


class OrbitSchema:
  S = 's', 'length'
  PHI = 'phi', 'rad'
  X = 'x', 'length'
  Y = 'y', 'length'
  CHORD = 'chord', 'length'


class EstimateSchema:
  Y0 = 'y0', '-'
  N = 'N', '-'
  D_Y = 'D_y', '-'
  D_X = 'D_x', '-'


class NgonSchema:
  INDEX = 'n'
  PERIMETER_A = 'L_n_a', 'length'
  PERIMETER_B = 'L_n_b', 'length'
  DIFF = 'diff', 'length'


class GapSchema:
  THETA = 'theta', 'rad'
  PERIOD = 'period', '-'
  ORBIT_PERIMETER = 'orbit_perimeter', 'length'
  L_Q = 'L_q', 'length'
  GAP = 'gap', 'length'


class CheckSchema:
  INDEX = 'check'
  VALUE_A = 'table_a', '-'
  VALUE_B = 'table_b', '-'
  DIFF = 'difference', '-'
  THRESHOLD = 'threshold', '-'
  STATUS = 'status', '-'
