class PlotSchema:
  CANVAS = 1000.0
  POINTS_PER_INCH = 72.0
  BOUNDARY_SAMPLES = 2048
  X_LABEL = 'x (length)'
  Y_LABEL = 'y (length)'
  BOUNDARY = 'boundary'
  JOINTS = 'block joints'
  ORBIT = 'orbit chords'
  PALETTE = 'deep'
  SVG_SALT = 'billiardlib'
