"""Focusing NLS experiments from Python.

    >>> import solitonscope as ss
    >>> cfg = ss.Config.default("flux_classifier")
    >>> cfg.output_dir = "runs/fc"
    >>> ss.run(cfg).passed
    True
"""

from pathlib import Path

from ._core import (
    Config,
    Error,
    InvalidArgument,
    Report,
    evolve,
    grid_nodes,
    read_csv,
    report_from_dir,
    run,
    soliton_profile,
)

__all__ = [
    "Config",
    "Error",
    "InvalidArgument",
    "Report",
    "evolve",
    "grid_nodes",
    "load_run",
    "read_csv",
    "report_from_dir",
    "run",
    "soliton_profile",
]


def load_run(run_dir):
    """Every CSV table of a run directory, keyed by file stem."""
    run_dir = Path(run_dir)
    tables = {}
    for line in (run_dir / "MANIFEST").read_text().splitlines():
        if line.startswith("file ") and line.endswith(".csv"):
            name = line[len("file "):]
            tables[Path(name).stem] = read_csv(run_dir / name)
    return tables
