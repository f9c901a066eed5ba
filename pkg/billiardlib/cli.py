"""Command line interface: construct, verify, invariants, orbits, render and
estimates."""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Sequence

import pandas as pd

from billiardlib import __version__
from billiardlib.analysis import comparison, invariants
from billiardlib.construction import scheme
from billiardlib.dynamics import billiard, ngon
from billiardlib.io import config, render, serialization
from billiardlib.lazutkin import estimates
from billiardlib.structures import enums, exceptions
from billiardlib.structures.table_schema import CheckSchema

logger = logging.getLogger('billiardlib')

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
PERIMETER_THRESHOLD = 1e-8
DEFAULT_Y0 = (0.05, 0.02, 0.01, 0.005)


def _global_options() -> argparse.ArgumentParser:
  common_parser = argparse.ArgumentParser(add_help=False)
  common_parser.add_argument('--config', type=Path, default=None,
                             help='INI run configuration')
  common_parser.add_argument('--out-dir', type=Path, default=None,
                             help='directory for written files')
  common_parser.add_argument('--tol-scale', type=float, default=None,
                             help='global tolerance multiplier')
  common_parser.add_argument('--seed', type=int, default=None,
                             help='seed of every random choice')
  common_parser.add_argument('--log-level', default=None,
                             help='DEBUG, INFO, WARNING or ERROR')
  return common_parser


def build_parser() -> argparse.ArgumentParser:
  parent = _global_options()
  parser = argparse.ArgumentParser(
      prog='billiardlib',
      description='Glue convex billiard tables from matched blocks.')
  parser.add_argument('--version', action='version',
                      version=f'%(prog)s {__version__}')
  commands = parser.add_subparsers(dest='command', required=True)

  commands.add_parser(enums.Command.CONSTRUCT, parents=[parent],
                      help='run the matching scheme and write both tables')

  verify = commands.add_parser(enums.Command.VERIFY, parents=[parent],
                               help='check a constructed pair')
  verify.add_argument('table_a', type=Path)
  verify.add_argument('table_b', type=Path)
  verify.add_argument('certificates', type=Path)

  inv = commands.add_parser(enums.Command.INVARIANTS, parents=[parent],
                            help='compare the invariants of two tables')
  inv.add_argument('table_a', type=Path)
  inv.add_argument('table_b', type=Path)

  orbits = commands.add_parser(enums.Command.ORBITS, parents=[parent],
                               help='export closed orbits of a table')
  orbits.add_argument('table', type=Path)
  orbits.add_argument('--theta', type=float, action='append', default=[],
                      help='matched angle (repeatable)')
  orbits.add_argument('--certificates', type=Path, default=None,
                      help='take the matched angles from a certificate file')
  orbits.add_argument('--ngon', type=int, action='append', default=[],
                      help='also export the maximal n-gon (repeatable)')

  draw = commands.add_parser(enums.Command.RENDER, parents=[parent],
                             help='draw tables and an orbit as SVG')
  draw.add_argument('tables', type=Path, nargs='+')
  draw.add_argument('--orbit', type=Path, default=None,
                    help='orbit file drawn on the first table')
  draw.add_argument('--output', type=Path, default=None,
                    help='SVG file, default <out-dir>/tables.svg')

  glance = commands.add_parser(enums.Command.ESTIMATES, parents=[parent],
                               help='fit the glancing-orbit drift exponents')
  glance.add_argument('table', type=Path)
  glance.add_argument('--y0', type=float, action='append', default=[],
                      help='initial y (repeatable)')
  return parser


def _settings(args: argparse.Namespace) -> config.RunSettings:
  return config.load_settings({
      'config': args.config,
      'out_dir': args.out_dir,
      'tol_scale': args.tol_scale,
      'seed': args.seed,
      'log_level': args.log_level,
  })


def _require_files(*paths: Path) -> None:
  for path in paths:
    if not path.is_file():
      raise FileNotFoundError(f'{path} not found')


def cmd_construct(args: argparse.Namespace,
                  settings: config.RunSettings) -> int:
  out_dir = settings.out_dir
  out_dir.mkdir(parents=True, exist_ok=True)
  paths = {a.name.lower(): out_dir / a.filename for a in enums.Artifact}
  handler = logging.FileHandler(paths['run_log'], mode='w', encoding='utf-8')
  handler.setFormatter(logging.Formatter(LOG_FORMAT))
  logger.addHandler(handler)
  timings: dict[str, float] = {}
  try:
    logger.info('construct: %s', settings.as_dict())
    logger.info('tolerances: %s', settings.tolerances.as_dict())
    start = time.perf_counter()
    result = scheme.run_scheme(settings.scheme)
    timings['run_scheme'] = time.perf_counter() - start
    serialization.write_table(paths['table_a'], result.table_a)
    serialization.write_table(paths['table_b'], result.table_b)
    serialization.write_certificates(paths['certificates'],
                                     result.certificates)
    logger.info('matched angles: %s', result.thetas)
    logger.info('periods: %s', result.report['periods'])
  finally:
    logger.removeHandler(handler)
    handler.close()
  manifest = serialization.manifest_document(
      settings.as_dict(), settings.tolerances,
      {k: v for k, v in paths.items() if k != 'manifest'}, timings,
      __version__)
  serialization.write_yaml(paths['manifest'], manifest)
  print(f'wrote {len(paths)} files to {out_dir}')
  return enums.ExitCode.OK


def orbit_checks(table_a, table_b, thetas: Sequence[float],
                 tolerances) -> list[tuple]:
  """Period and perimeter rows of the verification table."""
  rows = []
  for j, theta in enumerate(thetas, start=1):
    try:
      orbit_a = billiard.closed_orbit_from_match(table_a, theta, tolerances)
      orbit_b = billiard.closed_orbit_from_match(table_b, theta, tolerances)
    except exceptions.ClosureFailure as failure:
      logger.error('theta_%d = %.17g: %s', j, theta, failure)
      rows.append((f'orbit theta_{j}', theta, theta, failure.residual,
                   tolerances.orbit_closure, enums.CheckStatus.FAIL.value))
      continue
    period_status = (enums.CheckStatus.PASS if orbit_a.period == orbit_b.period
                     else enums.CheckStatus.FAIL)
    rows.append((f'period theta_{j}', float(orbit_a.period),
                 float(orbit_b.period),
                 float(abs(orbit_a.period - orbit_b.period)), 0.0,
                 period_status.value))
    gap = abs(orbit_a.perimeter - orbit_b.perimeter) / orbit_a.perimeter
    perimeter_status = (enums.CheckStatus.PASS if gap <= PERIMETER_THRESHOLD
                        else enums.CheckStatus.FAIL)
    rows.append((f'perimeter theta_{j}', orbit_a.perimeter, orbit_b.perimeter,
                 gap, PERIMETER_THRESHOLD, perimeter_status.value))
  return rows


def cmd_verify(args: argparse.Namespace, settings: config.RunSettings) -> int:
  _require_files(args.table_a, args.table_b, args.certificates)
  tolerances = settings.tolerances
  table_a = serialization.read_table(args.table_a, tolerances)
  table_b = serialization.read_table(args.table_b, tolerances)
  certificates = serialization.read_certificates(args.certificates)
  thetas = sorted({c.theta for c in certificates}, reverse=True)

  rows = orbit_checks(table_a, table_b, thetas, tolerances)
  report_a, report_b = invariants.compare_tables(table_a, table_b,
                                                 settings.n_grid,
                                                 settings.order, tolerances)
  check = comparison.TableComparison(
      report_a, report_b, congruence_threshold=tolerances.non_congruence)
  invariant_rows = check.comparison_results()
  frame = pd.concat([comparison.checks_frame(rows), invariant_rows])
  print(frame.to_string())

  out_dir = settings.out_dir
  perimeters = invariants.ngon_table(table_a, table_b, settings.n_grid,
                                     tolerances)
  serialization.write_frame(out_dir / 'ngon.csv', perimeters, index=True)
  print(perimeters.to_string())
  for name, table in (('a', table_a), ('b', table_b)):
    try:
      gaps = invariants.matched_orbit_gaps(table, thetas, tolerances)
    except exceptions.ClosureFailure as failure:
      logger.error('no orbit gaps for table %s: %s', name, failure)
      continue
    serialization.write_frame(out_dir / f'gaps_{name}.csv', gaps)
    print(gaps.to_string(index=False))
  failed = (frame[CheckSchema.STATUS] == enums.CheckStatus.FAIL.value).any()
  return enums.ExitCode.VERIFY_FAILED if failed else enums.ExitCode.OK


def cmd_invariants(args: argparse.Namespace,
                   settings: config.RunSettings) -> int:
  _require_files(args.table_a, args.table_b)
  tolerances = settings.tolerances
  table_a = serialization.read_table(args.table_a, tolerances)
  table_b = serialization.read_table(args.table_b, tolerances)
  report_a, report_b = invariants.compare_tables(table_a, table_b,
                                                 settings.n_grid,
                                                 settings.order, tolerances)
  out_dir = settings.out_dir
  serialization.write_yaml(
      out_dir / 'invariants.yaml',
      serialization.report_document(report_a, report_b, settings.n_grid))
  serialization.write_frame(
      out_dir / 'ngon.csv',
      invariants.ngon_table(table_a, table_b, settings.n_grid, tolerances),
      index=True)
  summary = comparison.TableComparison(report_a, report_b).summary_results
  print(summary.to_string())
  return enums.ExitCode.OK


def cmd_orbits(args: argparse.Namespace, settings: config.RunSettings) -> int:
  _require_files(args.table)
  thetas = list(args.theta)
  if args.certificates is not None:
    _require_files(args.certificates)
    thetas.extend(
        sorted({
            c.theta for c in serialization.read_certificates(args.certificates)
        },
               reverse=True))
  if not thetas and not args.ngon:
    raise exceptions.PreconditionError('give --theta, --certificates or --ngon')
  tolerances = settings.tolerances
  table = serialization.read_table(args.table, tolerances)
  out_dir = settings.out_dir
  for j, theta in enumerate(thetas, start=1):
    orbit = billiard.closed_orbit_from_match(table, theta, tolerances)
    path = serialization.write_orbit(out_dir / f'orbit_theta_{j}.csv', table,
                                     orbit)
    print(f'{path}: period {orbit.period}, perimeter {orbit.perimeter:.17g}')
  for n in args.ngon:
    orbit = ngon.max_perimeter_ngon(table, n, tolerances)
    path = serialization.write_orbit(out_dir / f'ngon_{n}.csv', table, orbit)
    print(f'{path}: L_{n} = {orbit.perimeter:.17g}')
  return enums.ExitCode.OK


def cmd_render(args: argparse.Namespace, settings: config.RunSettings) -> int:
  _require_files(*args.tables)
  tables = [
      serialization.read_table(path, settings.tolerances)
      for path in args.tables
  ]
  orbits: list[billiard.Orbit | None] = [None] * len(tables)
  if args.orbit is not None:
    _require_files(args.orbit)
    orbits[0] = serialization.orbit_from_frame(
        *serialization.read_orbit(args.orbit))
  output = args.output or settings.out_dir / 'tables.svg'
  render.render_tables(output, tables, orbits,
                       [path.stem for path in args.tables])
  print(f'wrote {output}')
  return enums.ExitCode.OK


def cmd_estimates(args: argparse.Namespace,
                  settings: config.RunSettings) -> int:
  _require_files(args.table)
  table = serialization.read_table(args.table, settings.tolerances)
  result = estimates.verify_glancing_estimates(table, args.y0 or DEFAULT_Y0,
                                               settings.tolerances)
  serialization.write_frame(settings.out_dir / 'estimates.csv', result.table)
  print(result.table.to_string(index=False))
  print(f'e_y = {result.e_y:.3f}, e_x = {result.e_x:.3f}, '
        f'kendall tau = {result.trend_tau:.3f} (p = {result.trend_pvalue:.3f})')
  return enums.ExitCode.OK


COMMANDS: dict[str, Callable[[argparse.Namespace, config.RunSettings], int]] = {
    enums.Command.CONSTRUCT: cmd_construct,
    enums.Command.VERIFY: cmd_verify,
    enums.Command.INVARIANTS: cmd_invariants,
    enums.Command.ORBITS: cmd_orbits,
    enums.Command.RENDER: cmd_render,
    enums.Command.ESTIMATES: cmd_estimates,
}


def main(argv: Sequence[str] | None = None) -> int:
  """
  Run one command and return its exit code.

  Library errors map to their own exit codes with a one-line diagnostic on
  stderr; missing input files are usage errors.
  """
  parser = build_parser()
  try:
    args = parser.parse_args(argv)
  except SystemExit as exit_request:
    return int(exit_request.code or 0)
  try:
    settings = _settings(args)
    logging.basicConfig(level=settings.log_level, format=LOG_FORMAT)
    return int(COMMANDS[args.command](args, settings))
  except FileNotFoundError as error:
    print(f'billiardlib: {error}', file=sys.stderr)
    return enums.ExitCode.USAGE
  except exceptions.BilliardLibError as error:
    print(f'billiardlib: {type(error).__name__}: {error}', file=sys.stderr)
    return int(error.exit_code)


if __name__ == '__main__':
  sys.exit(main())
