import click

from config import get_config
from services import mz_service
from utils.decorators import handle_exceptions
from .common import emit, json_text, load_pair, parse_floats, run_metadata, run_options


@click.command('mz')
@run_options
@click.option('--mask', 'source', required=True, help='builtin:<name> or a mask file')
@click.option('--delta', 'deltas', default='0.25,0.5,0.9', show_default=True,
              help='Comma separated set measures in (0, 1]')
@click.option('--norm', type=click.Choice(['l1', 'l2', 'both']), default='l1', show_default=True)
@click.option('--resolution', type=int, default=None, help='Grid resolution of the sets')
@click.option('--seed', type=int, default=None, help='Seed of the random multistarts')
@click.option('--multistarts', type=int, default=None, help='Random starts per estimate')
@click.option('--out', default=None, help='Output file (stdout when omitted)')
@handle_exceptions
def mz_command(source, deltas, norm, resolution, seed, multistarts, out):
    """Estimate the norm-equivalence constants B and C_delta"""
    settings = get_config()
    resolution = settings.DEFAULT_RESOLUTION if resolution is None else resolution
    seed = settings.DEFAULT_SEED if seed is None else seed
    multistarts = settings.MZ_MULTISTARTS if multistarts is None else multistarts
    mask, pair = load_pair(source)
    values = parse_floats(deltas, '--delta')
    report = mz_service.mz_report(pair, values, norm, resolution, multistarts, seed)

    metadata = run_metadata('mz', mask=mask.name, deltas=values, norm=norm,
                            resolution=resolution, seed=seed, multistarts=multistarts)
    emit(json_text(metadata, report.to_dict()), out)
