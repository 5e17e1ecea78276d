import click

from config import get_config
from services import eval_service
from utils.decorators import handle_exceptions
from .common import csv_text, emit, json_text, load_pair, run_metadata, run_options


@click.command('eval')
@run_options
@click.option('--mask', 'source', required=True, help='builtin:<name> or a mask file')
@click.option('--resolution', type=int, default=None, help='Grid k 2^-resolution on [0, 1]')
@click.option('--x', 'points', default=None, help='Comma separated points of [0, 1]')
@click.option('--tol', type=float, default=None, help='Uncertainty radius target for --x')
@click.option('--depth', type=int, default=None, help='Fixed enclosure depth for --x')
@click.option('--out', default=None, help='Output file (stdout when omitted)')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv')
@handle_exceptions
def eval_command(source, resolution, points, tol, depth, out, fmt):
    """Evaluate Phi(x) = (phi(x), ..., phi(x+N-1)) on a grid or at given points"""
    settings = get_config()
    mask, pair = load_pair(source)
    if points:
        if tol is None and depth is None:
            tol = settings.EVAL_TOLERANCE
        xs = [part.strip() for part in points.split(',') if part.strip()]
        rows = eval_service.batch_eval(pair, points=xs, tol=tol, depth=depth)
        resolution = None
    else:
        resolution = settings.DEFAULT_RESOLUTION if resolution is None else resolution
        rows = eval_service.batch_eval(pair, resolution=resolution)

    metadata = run_metadata('eval', mask=mask.name, resolution=resolution, x=points,
                            tol=tol, depth=depth, format=fmt)
    if fmt == 'json':
        emit(json_text(metadata, {'mask': mask.to_dict(), 'rows': [r.to_dict() for r in rows]}), out)
        return
    header = ['x'] + [f'phi_{n}' for n in range(pair.N)] + ['uncertainty_radius']
    emit(csv_text(metadata, header, ([r.x] + list(r.values) + [r.radius] for r in rows)), out)
