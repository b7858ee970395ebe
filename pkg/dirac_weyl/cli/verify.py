from typing import Annotated, List, Optional

import typer

from .console import console, err_console
from .utils import (
    BuiltinOpt,
    ConfigOpt,
    FormatOpt,
    OutOpt,
    VerboseOpt,
    add_log_handler,
    cli_errors,
    load,
    output_dir,
    rows_table,
)

app = typer.Typer()

MODULES = ["dirac_core", "boundary_algebra", "weyl_engine", "defect_lab"]


@app.command(
    help="""Runs the invariant suite over the built-in potentials.

With --config or --builtin the scenario's own grid is checked as well. Writes
verify.csv and report.json; exits with 4 if any check fails.""",
)
def verify(
    config: ConfigOpt = None,
    builtin: BuiltinOpt = None,
    module: Annotated[
        Optional[List[str]],
        typer.Option("--module", "-m", help=f"Only run checks of this module ({', '.join(MODULES)})."),
    ] = None,
    out: OutOpt = None,
    format: FormatOpt = None,
    verbose: VerboseOpt = 0,
):
    add_log_handler(verbose)
    from dirac_weyl.app_dirs import run_dir
    from dirac_weyl.report_io import VERIFY_COLUMNS, Table, build_report, write_report, write_table
    from dirac_weyl.settings import get_settings
    from dirac_weyl.verify_suite import run_suite, scenario_checks

    for name in module or []:
        if name not in MODULES:
            err_console.print(f"Unknown module [info]{name}[/]. Choose from {', '.join(MODULES)}.",
                              style="error")
            raise typer.Exit(1)

    with cli_errors():
        scenario = load(config, builtin, required=False)
        settings = get_settings()
        verdicts = run_suite(settings, module)
        if scenario is not None:
            settings = scenario.settings(settings)
            verdicts += scenario_checks(scenario, settings)

        records = [v.to_record() for v in verdicts]
        styled = [{**r, "status": f"[{'pass' if r['status'] == 'PASS' else 'fail'}]{r['status']}[/]"}
                  for r in records]
        console.print(rows_table("Invariant suite", VERIFY_COLUMNS[:-1], styled))

        out = output_dir(scenario, out) if scenario is not None else (out or run_dir("verify"))
        table = Table("verify", VERIFY_COLUMNS, records)
        formats = [format.value] if format is not None else ["csv"]
        for fmt in formats:
            console.print(f"Wrote [comment]{write_table(table, out, fmt, settings)}[/]")
        report = build_report("verify", scenario.echo() if scenario is not None else None,
                              settings, [table], verdicts=records)
        console.print(f"Wrote [comment]{write_report(report, out)}[/]")

    failed = [v for v in verdicts if not v.passed]
    if failed:
        for v in failed:
            err_console.print(f"FAIL {v.module}.{v.check}: measured {v.measured:.3e}, "
                              f"threshold {v.threshold:.3e} {v.detail}", style="error")
        raise typer.Exit(4)
    console.print(f"All {len(verdicts)} checks [pass]PASS[/].")
