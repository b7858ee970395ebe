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

SUMMARY = ["lam_re", "lam_im", "min_eig_imM", "sign_ok", "l2_verdict", "cr_residual", "pair_identity_next"]


@app.command(
    help="""Sweeps M(λ) over the λ-grid with diagnostic columns.

On top of the weyl columns: the sign of Im M, the L² verdict for the Weyl solution,
a finite-difference holomorphy residual and the two-point identity against the next λ.""",
)
def sweep(
    config: ConfigOpt = None,
    builtin: BuiltinOpt = None,
    out: OutOpt = None,
    threads: ThreadsOpt = None,
    force: ForceOpt = False,
    format: FormatOpt = None,
    verbose: VerboseOpt = 0,
):
    add_log_handler(verbose)
    from dirac_weyl.pipelines import run_sweep

    with cli_errors():
        scenario = load(config, builtin)
        result = run_sweep(scenario, default_threads(threads), force)
        console.print(rows_table(f"Sweep of {scenario.name}", SUMMARY, result.tables[0].rows))
        finish(result, out, format)
