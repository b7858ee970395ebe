import logging
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Annotated, Optional

import typer
from rich.logging import RichHandler
from rich.table import Table

from dirac_weyl.utils import pluralize

from .console import console, err_console


class Format(str, Enum):
    csv = "csv"
    json = "json"


ConfigOpt = Annotated[
    Optional[Path], typer.Option("--config", help="Scenario JSON file.", dir_okay=False)
]
BuiltinOpt = Annotated[
    Optional[str], typer.Option("--builtin", help="Name of a built-in scenario (see `diracw scenarios`).")
]
OutOpt = Annotated[
    Optional[Path],
    typer.Option("--out", help="Output directory. Defaults to the scenario's outputs.directory "
                                "or a per-scenario directory in the user data dir.", file_okay=False),
]
ThreadsOpt = Annotated[
    Optional[int], typer.Option("--threads", min=1, help="Worker threads for the λ-grid.")
]
ForceOpt = Annotated[
    bool, typer.Option("--force", help="Compute strip-regime λ anyway; results are marked unwarranted.")
]
FormatOpt = Annotated[
    Optional[Format],
    typer.Option("--format", help="Format of the row tables. Defaults to the scenario's outputs.formats."),
]
VerboseOpt = Annotated[int, typer.Option("--verbose", "-v", count=True, help="Increase verbosity")]


def add_log_handler(verbose: int, console=err_console):
    """Mirror log messages on the (stderr) console too"""
    from dirac_weyl import logger

    if verbose >= 3:
        level = logging.DEBUG
    elif verbose >= 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    h = RichHandler(level=level, console=console)
    logger.addHandler(h)


def print_error_details(err: dict):
    loc = ".".join(map(str, err["loc"])) or "<root>"
    err_console.print(f"\tError at [info]{loc}[/]: [error]{err['msg']}[/]", style="error")
    if "input" in err:
        err_console.print("\tGot input: ", style="error")
        err_console.print(repr(err["input"]))


@contextmanager
def cli_errors():
    """Turn library errors into a message on stderr and the matching exit code."""
    from dirac_weyl.utils import DiracWeylError, ScenarioError

    try:
        yield
    except ScenarioError as e:
        err_console.print(str(e), style="error")
        for err in e.errors:
            print_error_details(err)
        raise typer.Exit(e.exit_code)
    except DiracWeylError as e:
        err_console.print(str(e), style="error")
        raise typer.Exit(e.exit_code)


def load(config: Optional[Path], builtin: Optional[str], required: bool = True):
    from dirac_weyl.scenario import builtin as get_builtin
    from dirac_weyl.scenario import load_scenario

    if config is not None and builtin is not None:
        err_console.print("Give either --config or --builtin, not both.", style="error")
        raise typer.Exit(1)
    if config is not None:
        return load_scenario(config)
    if builtin is not None:
        return get_builtin(builtin)
    if required:
        err_console.print("One of --config PATH or --builtin NAME is required.", style="error")
        raise typer.Exit(1)
    return None


def default_threads(threads: Optional[int]) -> int:
    from dirac_weyl.settings import get_settings

    return threads if threads is not None else get_settings().output.threads


def output_dir(scenario, out: Optional[Path]) -> Path:
    from dirac_weyl.app_dirs import run_dir

    if out is not None:
        return out
    if scenario.outputs.directory:
        return Path(scenario.outputs.directory)
    return run_dir(scenario.name)


def write_artifacts(result, out: Optional[Path], fmt: Optional[Format], verdicts=()) -> Path:
    """Tables plus report.json; returns the output directory."""
    from dirac_weyl.report_io import build_report, write_report, write_table

    prep = result.prepared
    scenario = prep.scenario
    out = output_dir(scenario, out)
    formats = [fmt.value] if fmt is not None else scenario.outputs.formats
    for table in result.tables:
        for f in formats:
            path = write_table(table, out, f, prep.settings)
            console.print(f"Wrote [comment]{path}[/] ({len(table.rows)} {pluralize(table.rows, 'row')})")
    report = build_report(
        result.command,
        scenario.echo(),
        prep.settings,
        result.tables,
        prep.scheme.echo() if prep.scheme is not None else None,
        [v.to_record() for v in verdicts],
        {"classification": prep.report.to_record(), **(result.extra or {})},
    )
    console.print(f"Wrote [comment]{write_report(report, out)}[/]")
    return out


def finish(result, out: Optional[Path], fmt: Optional[Format]):
    """Write everything, then exit 3 if some λ did not converge."""
    from dirac_weyl.utils import NonConvergenceError

    write_artifacts(result, out, fmt)
    if result.failures:
        raise NonConvergenceError(result.failures)


def rows_table(title: str, columns, rows) -> Table:
    table = Table(title=title, box=None, pad_edge=False)
    for col in columns:
        table.add_column(col, style="info" if col.startswith("lam") else None)
    for row in rows:
        table.add_row(*(_cell(row.get(col)) for col in columns))
    return table


def _cell(value) -> str:
    if value is None:
        return "[dim]-[/]"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
