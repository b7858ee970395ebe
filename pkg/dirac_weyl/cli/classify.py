import typer
from rich.table import Table

from .console import console
from .utils import (
    BuiltinOpt,
    ConfigOpt,
    FormatOpt,
    OutOpt,
    VerboseOpt,
    add_log_handler,
    cli_errors,
    finish,
    load,
)

app = typer.Typer()


@app.command(help="Classifies the expression of a scenario: symmetry flags, α_Q, β_Q and κ±.")
def classify(
    config: ConfigOpt = None,
    builtin: BuiltinOpt = None,
    out: OutOpt = None,
    format: FormatOpt = None,
    verbose: VerboseOpt = 0,
):
    add_log_handler(verbose)
    from dirac_weyl.pipelines import run_classify

    with cli_errors():
        scenario = load(config, builtin)
        result = run_classify(scenario)
        table = Table(title=f"Classification of {scenario.name}", show_header=False, box=None)
        for key, value in result.tables[0].rows[0].items():
            table.add_row(f"[info]{key}[/]", str(value))
        console.print(table)
        finish(result, out, format)
