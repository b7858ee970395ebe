"""Writing run artifacts: CSV tables through pandas and the JSON run report."""

import math
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from dirac_weyl import logger
from dirac_weyl.__version__ import __version__
from dirac_weyl.settings import Settings, resolve
from dirac_weyl.utils import write_json

REPORT_SCHEMA = "dirac-weyl/report/1"

WEYL_TAIL = ["norm_residual", "pair_identity", "imag_identity", "converged", "L_used", "regime"]
SCHUR_COLUMNS = ["schur_norm"]
SWEEP_COLUMNS = ["min_eig_imM", "sign_ok", "l2_verdict", "l2_ratio", "cr_residual", "pair_identity_next"]
DEFECT_COLUMNS = ["lam_re", "lam_im", "count", "expected", "regime", "status", "margin",
                  "exponents", "offending"]
FINITE_COLUMNS = ["L", "n", "kernel_dim", "kernel_dim_adjoint", "trace_rank", "defect_sum",
                  "dim_theta", "dim_theta_cross", "quasi_selfadjoint", "status"]
CLASSIFY_COLUMNS = ["formally_selfadjoint", "j_symmetric", "almost_fsa", "alpha", "beta", "p",
                    "kappa_plus", "kappa_minus", "j_reason", "hermitian_residual"]
VERIFY_COLUMNS = ["module", "check", "status", "measured", "threshold", "detail"]


def matrix_columns(prefix: str, p: int) -> List[str]:
    return [f"{prefix}_{i}_{j}_{part}" for i in range(p) for j in range(p) for part in ("re", "im")]


def weyl_columns(p: int, sweep: bool = False) -> List[str]:
    cols = ["lam_re", "lam_im", *matrix_columns("M", p), *WEYL_TAIL,
            *matrix_columns("Ms", p), *SCHUR_COLUMNS]
    if sweep:
        cols += SWEEP_COLUMNS
    return cols


class Table(NamedTuple):
    name: str  # file stem
    columns: List[str]
    rows: List[dict]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame.from_records(self.rows, columns=self.columns)


def write_table(table: Table, out_dir: Path, fmt: str = "csv",
                settings: Optional[Settings] = None) -> Path:
    """Header fixed by `table.columns`; floats with 17 significant digits."""
    settings = resolve(settings)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / f"{table.name}.json"
        write_json([json_safe({c: row.get(c) for c in table.columns}) for row in table.rows], path)
    else:
        path = out_dir / f"{table.name}.csv"
        table.to_frame().to_csv(
            path, index=False, float_format=settings.output.float_format, lineterminator="\n")
    logger.info(f"Wrote {len(table.rows)} rows to {path}")
    return path


def json_safe(value):
    """Plain JSON types; NaN and infinities become None, complex numbers [re, im]."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [json_safe(value.real), json_safe(value.imag)]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def build_report(
    command: str,
    scenario_echo: Optional[dict],
    settings: Settings,
    tables: Sequence[Table] = (),
    boundary_echo: Optional[dict] = None,
    verdicts: Sequence[dict] = (),
    extra: Optional[dict] = None,
) -> dict:
    report = {
        "schema": REPORT_SCHEMA,
        "version": __version__,
        "command": command,
        "scenario": scenario_echo,
        "boundary": boundary_echo,
        "settings": settings.model_dump(),
        "tables": {t.name: t.rows for t in tables},
        "verdicts": list(verdicts),
    }
    if extra:
        report.update(extra)
    return json_safe(report)


def write_report(report: dict, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.json"
    write_json(report, path)
    return path
