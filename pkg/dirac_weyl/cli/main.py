import sys

import typer

from . import CMD_NAME
from .classify import app as classify_app
from .config import app as config_app
from .console import err_console
from .defect import app as defect_app
from .log import app as log_app
from .scenarios import app as scenarios_app
from .sweep import app as sweep_app
from .verify import app as verify_app
from .weyl import app as weyl_app

app = typer.Typer(name=CMD_NAME, no_args_is_help=True)
"""
Single-command sub apps (classify, weyl, ...) are added without a name, so that
`diracw weyl` is not `diracw weyl weyl`. Their help lives on the command itself.
"""
app.add_typer(classify_app)
app.add_typer(weyl_app)
app.add_typer(defect_app)
app.add_typer(sweep_app)
app.add_typer(verify_app)
app.add_typer(scenarios_app)
app.add_typer(config_app, name="config")
app.add_typer(log_app, name="log")

# typer re-exports BadParameter but not its bases
UsageError = typer.BadParameter.__base__
ClickException = UsageError.__base__


def main(args=None):
    """Console script entry point. Usage errors exit with 1 instead of 2."""
    try:
        code = app(args=args, standalone_mode=False)
    except UsageError as e:
        e.show()
        sys.exit(1)
    except ClickException as e:
        e.show()
        sys.exit(e.exit_code)
    except typer.Abort:
        err_console.print("Aborted!", style="error")
        sys.exit(1)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    main()
