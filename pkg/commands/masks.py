import click

from services import mask_service
from utils.decorators import handle_exceptions
from .common import emit, json_text, run_metadata, run_options


@click.command('masks')
@run_options
@click.option('--mask', 'source', default=None, help='Show one mask instead of the catalog')
@click.option('--integrate', is_flag=True, help='Show the mask of phi convolved with 1_[0,1]')
@click.option('--save', default=None, help='Also write the shown mask as a mask file')
@click.option('--out', default=None, help='Output file (stdout when omitted)')
@handle_exceptions
def masks_command(source, integrate, save, out):
    """List the built-in catalog, or show one mask with its two-scale matrices"""
    metadata = run_metadata('masks', mask=source, integrate=integrate)
    if source is None:
        emit(json_text(metadata, {'masks': [m.to_dict() for m in mask_service.catalog()]}), out)
        return
    mask = mask_service.resolve_mask(source)
    if integrate:
        mask = mask_service.integrate_mask(mask)
    payload = {'mask': mask.to_dict()}
    if mask.N >= 2:
        payload['two_scale'] = mask_service.build_two_scale(mask).to_dict()
    if save:
        mask_service.dump_mask(mask, save)
    emit(json_text(metadata, payload), out)
