import typer

from .console import console, err_console
from .utils import (
    BuiltinOpt,
    ConfigOpt,
    FormatOpt,
    OutOpt,
    ThreadsOpt,
    VerboseOpt,
    add_log_handler,
    cli_errors,
    default_threads,
    finish,
    load,
    rows_table,
)

app = typer.Typer()

HALF_LINE = ["lam_re", "lam_im", "count", "expected", "regime", "status", "exponents"]
FINITE = ["L", "n", "kernel_dim", "kernel_dim_adjoint", "trace_rank", "defect_sum", "status"]


def _styled(rows):
    styles = {"PASS": "pass", "FAIL": "fail"}
    for row in rows:
        status = row.get("status")
        if status in styles:
            row = {**row, "status": f"[{styles[status]}]{status}[/]"}
        yield row


@app.command(
    help="""Counts L² solutions (half-line) or checks the finite-interval dimension formulas.

The count is compared with the prediction from the signature of J (almost selfadjoint
potentials) or with p (j-symmetric ones); the status column says whether they agree.
Exits with 4 if any count disagrees.""",
)
def defect(
    config: ConfigOpt = None,
    builtin: BuiltinOpt = None,
    out: OutOpt = None,
    threads: ThreadsOpt = None,
    format: FormatOpt = None,
    verbose: VerboseOpt = 0,
):
    add_log_handler(verbose)
    from dirac_weyl.pipelines import run_defect

    with cli_errors():
        scenario = load(config, builtin)
        result = run_defect(scenario, default_threads(threads))
        rows = result.tables[0].rows
        columns = FINITE if "kernel_dim" in result.tables[0].columns else HALF_LINE
        console.print(rows_table(f"Defect numbers of {scenario.name}", columns, list(_styled(rows))))
        finish(result, out, format)

    failed = [row for row in rows if row.get("status") == "FAIL"]
    if failed:
        for row in failed:
            shown = ", ".join(f"{c}={row.get(c)}" for c in columns if c not in ("status", "exponents"))
            err_console.print(f"FAIL {shown}", style="error")
        raise typer.Exit(4)
