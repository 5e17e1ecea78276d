from pathlib import Path

import click

from services import expansion_service, mask_service
from utils.decorators import handle_exceptions
from .common import csv_text, emit, json_text, parse_floats, run_metadata, run_options


@click.command('converge')
@run_options
@click.option('--mask', 'source', required=True, help='builtin:<name> or a mask file')
@click.option('--f', 'expr', required=True, help='jump:c | tent:c | sin:k | poly:a0,a1,...')
@click.option('--levels', type=int, default=8, show_default=True, help='Finest level J')
@click.option('--resolution', type=int, default=None, help='Sampling resolution (default J + 6)')
@click.option('--window', default=None, help='Integer window lo,hi (default from the support)')
@click.option('--thresholds', default='', help='Comma separated thresholds M')
@click.option('--j0', type=int, default=None, help='First level of the Cauchy tail (default J/2)')
@click.option('--tail-tol', type=float, default=None, help='Cauchy tail tolerance')
@click.option('--out', default=None, help='CSV file (stdout when omitted)')
@click.option('--report', 'report_path', default=None,
              help='JSON report file (default: --out with a .json suffix)')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv')
@handle_exceptions
def converge_command(source, expr, levels, resolution, window, thresholds, j0, tail_tol, out,
                     report_path, fmt):
    """Multiresolution expansion f_0..f_J with its square and maximal functions"""
    mask = mask_service.resolve_mask(source)
    f = expansion_service.parse_function(expr)
    resolution = levels + 6 if resolution is None else resolution
    if window is not None:
        bounds = [int(v) for v in parse_floats(window, '--window')]
        if len(bounds) != 2 or bounds[0] >= bounds[1]:
            raise click.BadParameter(f"expected lo,hi with lo < hi, got {window!r}",
                                     param_hint='--window')
        window = tuple(bounds)
    seq = expansion_service.build_sequence(f, mask, levels, resolution, window)
    sq = expansion_service.square_function(seq)
    values_M = parse_floats(thresholds, '--thresholds')
    report = expansion_service.equivalence_report(seq, values_M, j0=j0, tail_tol=tail_tol)

    metadata = run_metadata('converge', mask=mask.name, f=f.expr, levels=levels,
                            resolution=resolution, window=[seq.grid.lo, seq.grid.hi],
                            thresholds=values_M,
                            j0=report['cauchy_tail']['j0'], tail_tol=report['cauchy_tail']['tail_tol'])
    if report_path is None and out:
        report_path = str(Path(out).with_suffix('.json'))

    if fmt == 'json':
        emit(json_text(metadata, report), report_path)
        return
    header = ['x'] + [f'f_{j}' for j in range(levels + 1)] + ['S_J', 'f_star']
    rows = zip(seq.grid.points(), *seq.values, sq.S_final, sq.fstar_final)
    emit(csv_text(metadata, header, rows), out)
    if report_path:
        emit(json_text(metadata, report), report_path)
