"""Static SVG drawings of tables and orbits."""
import logging
from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
import seaborn as sns
from matplotlib.figure import Figure

from billiardlib.common import common
from billiardlib.dynamics.billiard import Orbit
from billiardlib.kernel.table import BilliardTable
from billiardlib.structures.viz_schema import PlotSchema

logger = logging.getLogger(__name__)


def boundary_points(table: BilliardTable,
                    samples: int = PlotSchema.BOUNDARY_SAMPLES) -> np.ndarray:
  s = np.linspace(0.0, table.length, samples + 1)
  return table.point(s)


def _draw(axis, table: BilliardTable, orbit: Orbit | None, title: str,
          colors) -> None:
  outline = boundary_points(table)
  axis.plot(outline[:, 0], outline[:, 1], color=colors[0],
            label=PlotSchema.BOUNDARY)
  joints = table.point(table.joints)
  axis.scatter(joints[:, 0], joints[:, 1], color=colors[1], zorder=3,
               label=PlotSchema.JOINTS)
  if orbit is not None:
    vertices = table.point(np.array([state.s for state in orbit.states]))
    closed = np.vstack([vertices, vertices[:1]])
    axis.plot(closed[:, 0], closed[:, 1], color=colors[2], linewidth=0.8,
              label=PlotSchema.ORBIT)
  axis.set_aspect('equal')
  axis.set_xlabel(PlotSchema.X_LABEL)
  axis.set_ylabel(PlotSchema.Y_LABEL)
  axis.set_title(title)
  axis.legend(loc='upper right', fontsize='small')


def render_tables(path: Path,
                  tables: Sequence[BilliardTable],
                  orbits: Sequence[Orbit | None] | None = None,
                  titles: Sequence[str] | None = None) -> Path:
  """
  Draw tables side by side on a fixed 1000 x 1000 canvas and save as SVG.

  Each panel shows the boundary, the block joints and, when given, the
  orbit chords as a closed polyline. Output is deterministic: the SVG hash
  salt is fixed and no date is embedded.

  Args:
      path (Path): Output file.
      tables (Sequence[BilliardTable]): Tables to draw.
      orbits (Sequence[Orbit | None] | None, optional): One orbit or None
        per table.
      titles (Sequence[str] | None, optional): Panel titles.

  Returns:
      Path: The written file.
  """
  orbits = list(orbits) if orbits is not None else [None] * len(tables)
  titles = list(titles) if titles is not None else [
      f'table {i}' for i in range(1, len(tables) + 1)
  ]
  colors = sns.color_palette(PlotSchema.PALETTE, 3)
  size = PlotSchema.CANVAS / PlotSchema.POINTS_PER_INCH
  with matplotlib.rc_context({'svg.hashsalt': PlotSchema.SVG_SALT}):
    figure = Figure(figsize=(size, size), dpi=PlotSchema.POINTS_PER_INCH)
    axes = figure.subplots(1, len(tables), squeeze=False)[0]
    for axis, table, orbit, title in zip(axes, tables, orbits, titles):
      _draw(axis, table, orbit, title, colors)
    figure.tight_layout()
    common.create_path(path.parent)
    figure.savefig(path, format='svg', metadata={'Date': None})
  logger.info('rendered %d table(s) to %s', len(tables), path)
  return path
