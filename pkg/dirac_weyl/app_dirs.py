"""Per-user locations for the log file, the user config and default run outputs."""
from pathlib import Path

import appdirs

NAME = "dirac-weyl"
DATA_DIR = Path(appdirs.user_data_dir(NAME, appauthor=False, roaming=True))
CFG_DIR = Path(appdirs.user_config_dir(NAME, appauthor=False, roaming=True))
# `diracw weyl` without --out writes below this, one directory per scenario
RUNS_DIR = DATA_DIR / "runs"

for _dir in (DATA_DIR, CFG_DIR):
    _dir.mkdir(exist_ok=True, parents=True)


def run_dir(scenario_name: str) -> Path:
    path = RUNS_DIR / scenario_name
    path.mkdir(exist_ok=True, parents=True)
    return path
