import logging
import os

import click

from config import get_config
from commands import register_commands


def create_app(config_name=None):
    """Application factory function

    Args:
        config_name (str): Configuration name to use (development, production, testing)

    Returns:
        click.Group: Configured command group
    """
    # Determine config
    if config_name is not None:
        os.environ['REFINEKIT_CONFIG'] = config_name
    settings = get_config()

    # Initialize logging
    logging.basicConfig(
        level=getattr(logging, str(settings.LOG_LEVEL).upper(), logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s'
    )

    @click.group(context_settings={'help_option_names': ['-h', '--help']})
    @click.version_option(settings.VERSION, prog_name='refinekit')
    def cli():
        """Two-scale matrices, translate independence, norm constants and square functions"""

    # Register commands
    register_commands(cli)

    logging.getLogger(__name__).debug(
        f"refinekit {settings.VERSION} ready ({os.environ.get('REFINEKIT_CONFIG', 'default')} config)")
    return cli


# Application factory setup
app = None


def get_app():
    """Get or create the command group"""
    global app
    if app is None:
        app = create_app()
    return app


if __name__ == "__main__":
    get_app()()
