import typer

from .console import console
from .utils import (
    BuiltinOpt,
    ConfigOpt,
    ForceOpt,
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

SUMMARY = ["lam_re", "lam_im", "M_0_0_re", "M_0_0_im", "imag_identity", "converged", "L_used", "regime"]


@app.command(
    help="""Computes the Weyl function M(λ) over the scenario's λ-grid.

Writes msamples.csv (one row per λ, M and its Schur transform M_s as re/im columns)
and report.json. Exits with 3 when some λ did not converge, after writing the outputs.""",
)
def weyl(
    config: ConfigOpt = None,
    builtin: BuiltinOpt = None,
    out: OutOpt = None,
    threads: ThreadsOpt = None,
    force: ForceOpt = False,
    format: FormatOpt = None,
    verbose: VerboseOpt = 0,
):
    add_log_handler(verbose)
    from dirac_weyl.pipelines import run_weyl

    with cli_errors():
        scenario = load(config, builtin)
        result = run_weyl(scenario, default_threads(threads), force)
        console.print(rows_table(f"M(λ) for {scenario.name}", SUMMARY, result.tables[0].rows))
        finish(result, out, format)
