from .evaluate import eval_command
from .independence import independence_command
from .mz import mz_command
from .converge import converge_command
from .masks import masks_command


def register_commands(cli):
    """Register all commands with the command group"""

    # Mask catalog and two-scale matrices
    cli.add_command(masks_command)

    # Evaluation engine
    cli.add_command(eval_command)

    # Independence, norm constants and expansions
    cli.add_command(independence_command)
    cli.add_command(mz_command)
    cli.add_command(converge_command)


__all__ = ['register_commands', 'eval_command', 'independence_command', 'mz_command',
           'converge_command', 'masks_command']
