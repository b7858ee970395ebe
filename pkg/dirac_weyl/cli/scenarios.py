from typing import Annotated, Optional

import typer
from rich.table import Table

from .console import console, err_console

app = typer.Typer()


@app.command(help="Lists the built-in scenarios, or prints one of them as scenario JSON.")
def scenarios(
    show: Annotated[
        Optional[str], typer.Option("--show", help="Print this scenario as a config file.")
    ] = None,
):
    import json

    from dirac_weyl.scenario import builtin, builtin_names
    from dirac_weyl.utils import ScenarioError

    if show is not None:
        try:
            scenario = builtin(show)
        except ScenarioError as e:
            err_console.print(str(e), style="error")
            raise typer.Exit(e.exit_code)
        console.print_json(json.dumps(scenario.echo()))
        return

    table = Table(title="Built-in scenarios")
    table.add_column("name", style="info")
    table.add_column("J")
    table.add_column("potential")
    table.add_column("interval")
    table.add_column("description")
    for name in builtin_names():
        sc = builtin(name)
        ex = sc.expression
        j_form = ex.J if isinstance(ex.J, str) else "matrix"
        table.add_row(name, f"{j_form} (n={ex.n})", ex.potential.family, ex.interval.kind, sc.description)
    console.print(table)
