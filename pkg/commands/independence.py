import logging

import click

from models import CoefVector
from services import independence_service
from utils.decorators import handle_exceptions
from .common import emit, json_text, load_pair, parse_floats, run_metadata, run_options

logger = logging.getLogger(__name__)


@click.command('independence')
@run_options
@click.option('--mask', 'source', required=True, help='builtin:<name> or a mask file')
@click.option('--c', 'coefficients', required=True, help='Coefficient vector, e.g. 1,-1,0,0')
@click.option('--depth', type=int, default=16, show_default=True, help='Search depth')
@click.option('--resolution', 'resolutions', default='', help='Comma separated K_c resolutions')
@click.option('--tol', type=float, default=1e-9, show_default=True, help='Zero-set tolerance')
@click.option('--eta', type=float, default=None,
              help='Also amplify K_c through its densest dyadic cell (needs --resolution)')
@click.option('--out', default=None, help='Output file (stdout when omitted)')
@handle_exceptions
def independence_command(source, coefficients, depth, resolutions, tol, eta, out):
    """Decide whether c . Phi vanishes on a set of positive measure"""
    mask, pair = load_pair(source)
    parsed = CoefVector.parse(coefficients, exact=pair.exact)
    c = parsed.fitted_to(pair.N)
    if c.N != parsed.N:
        logger.warning(f"Dropped {parsed.N - c.N} trailing zero entries of c (N={pair.N})")
    levels = [int(r) for r in parse_floats(resolutions, '--resolution')]
    report = independence_service.independence_report(pair, c, depth, levels, tol)
    if eta is not None and levels:
        report['amplify'] = independence_service.amplify(pair, c, levels[-1], tol, eta=eta)

    metadata = run_metadata('independence', mask=mask.name, c=coefficients, depth=depth,
                            resolutions=levels, tol=tol, eta=eta)
    emit(json_text(metadata, report), out)
