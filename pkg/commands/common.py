"""
Shared plumbing for the commands: run options, metadata and deterministic writers
"""
import csv
import io
import json
import logging
import os
from functools import wraps

import click

from config import get_config
from services import mask_service, worker_pool
from utils.helpers import dumps_deterministic, json_default

logger = logging.getLogger(__name__)


def run_options(f):
    """Options every command accepts: --threads and --log-level"""
    @click.option('--threads', type=int, default=None,
                  help='Worker cap (falls back to REFINEKIT_THREADS); never changes results')
    @click.option('--log-level', default=None,
                  type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
    @wraps(f)
    def decorated_function(*args, threads=None, log_level=None, **kwargs):
        if log_level:
            logging.getLogger().setLevel(log_level.upper())
        worker_pool.set_threads(threads)
        return f(*args, **kwargs)
    return decorated_function


def parse_floats(text, option):
    """Comma separated floats; an empty string gives an empty list"""
    try:
        return [float(part) for part in (text or '').split(',') if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma separated numbers, got {text!r}",
                                 param_hint=option)


def load_pair(source):
    """Resolve a mask source and build its two-scale pair"""
    mask = mask_service.resolve_mask(source)
    return mask, mask_service.build_two_scale(mask)


# Settings that never change results stay out of the metadata, so runs with
# different worker caps or log levels produce the same bytes
UNRECORDED_SETTINGS = {'THREADS', 'LOG_LEVEL'}


def resolved_settings(settings=None):
    """Every configuration value a run can depend on"""
    settings = settings or get_config()
    return {name: getattr(settings, name) for name in dir(settings)
            if name.isupper() and name not in UNRECORDED_SETTINGS}


def run_metadata(command, **options):
    """Resolved configuration recorded in every output file

    ``options`` carries the command's own values after defaults are filled in.
    """
    settings = get_config()
    return {
        'command': command,
        'version': settings.VERSION,
        'config': os.environ.get('REFINEKIT_CONFIG', 'default'),
        'settings': resolved_settings(settings),
        'options': options,
    }


def format_cell(value):
    if isinstance(value, str):
        return value
    return repr(float(value))


def csv_text(metadata, header, rows):
    """CSV with a leading "# " line holding the metadata as compact JSON"""
    buffer = io.StringIO()
    buffer.write('# ' + json.dumps(metadata, default=json_default, sort_keys=True) + '\n')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def json_text(metadata, payload):
    return dumps_deterministic({**payload, 'run': metadata})


def emit(text, out=None):
    """Write to a file when a path is given, otherwise to stdout"""
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        logger.info(f"📄 Wrote {out}")
    else:
        click.echo(text, nl=False)
