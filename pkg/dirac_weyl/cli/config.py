from typing import Annotated, Optional

import typer

from .console import console, err_console

app = typer.Typer(name="config", help="Shows the numerical configuration.", no_args_is_help=True)


def _print_cfg(cfg: dict, prefix=""):
    for k, v in cfg.items():
        key = prefix + k
        if isinstance(v, dict):
            _print_cfg(v, key + ".")
        else:
            console.print(f"[info]{key}[/] = {v!r}")


@app.command(
    name="list",
    help="""Lists configuration settings. By default, only values overridden in the user config are shown.

With --all, the effective (validated) settings every run starts from are listed instead.""",
)
def list_(
    all: Annotated[bool, typer.Option(help="Show the effective settings, defaults included")] = False,
    section: Annotated[
        Optional[str], typer.Option(help="Only this section, e.g. weyl or integrator")
    ] = None,
):
    import confuse

    from dirac_weyl import config
    from dirac_weyl.settings import get_settings

    if all:
        cfg = get_settings().model_dump()
    else:
        cfg = confuse.RootView([s for s in config.sources if not s.default]).flatten()
    if section is not None:
        if section not in cfg:
            err_console.print(f"No [info]{section}[/] section. Have: {', '.join(cfg) or 'nothing'}",
                              style="error")
            raise typer.Exit(1)
        cfg = {section: cfg[section]}
    _print_cfg(cfg)


@app.command(name="path", help="Prints the location of the user config file.")
def path():
    from dirac_weyl import config

    console.print(config.user_config_path())
