"""Bundled real lifetime datasets and their loaders.

Two classical complete-data sets ship with the package (see
``data/PROVENANCE.md``).  The two censored illustrations (Stanford heart
transplant, brake-pad wear) are not redistributed: their loaders look for
user-supplied CSV files and raise :class:`DatasetMissing` with a pointer
to the original source when absent, so dependent checks skip visibly
instead of silently passing.
"""
from __future__ import annotations

import csv
import os
from importlib import resources
from pathlib import Path

import numpy as np

from .estimators import CensoredSample

__all__ = [
    "DatasetMissing",
    "DATA_DIR_ENV_VAR",
    "load_rat_survival",
    "load_ball_bearings",
    "load_heart_transplant",
    "load_brake_pads",
]

DATA_DIR_ENV_VAR = "GAMMAGOF_DATA_DIR"


class DatasetMissing(FileNotFoundError):
    """A dataset that is not redistributed with the package is absent."""


def _data_path(filename: str) -> Path | None:
    override = os.environ.get(DATA_DIR_ENV_VAR)
    if override:
        candidate = Path(override) / filename
        if candidate.is_file():
            return candidate
    packaged = resources.files("gammagof").joinpath("data", filename)
    try:
        if packaged.is_file():
            return Path(str(packaged))
    except OSError:  # pragma: no cover - non-filesystem resource loaders
        pass
    return None


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Read a lifetime CSV: required ``time`` column, optional ``status``.

    ``status`` is 1 for an observed failure and 0 for a censored row; a
    file without the column is a complete sample.  Malformed rows raise
    ``ValueError`` naming the offending data row (1-based).
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "time" not in reader.fieldnames:
            raise ValueError(f"{path}: missing required 'time' column")
        has_status = "status" in reader.fieldnames
        times: list[float] = []
        status: list[int] = []
        for row_number, row in enumerate(reader, start=1):
            raw = row.get("time")
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise ValueError(f"{path}: row {row_number}: unreadable time {raw!r}") from None
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{path}: row {row_number}: time must be positive, got {raw!r}")
            times.append(value)
            if has_status:
                flag = row.get("status")
                if flag not in ("0", "1"):
                    raise ValueError(
                        f"{path}: row {row_number}: status must be 0 or 1, got {flag!r}")
                status.append(int(flag))
    if not times:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(times), (np.asarray(status, dtype=np.int8) if has_status else None)


def _load_complete(filename: str) -> np.ndarray:
    path = _data_path(filename)
    if path is None:  # bundled files are always present; defensive only
        raise DatasetMissing(f"bundled dataset {filename} not found")
    times, status = read_dataset_csv(path)
    if status is not None:
        raise ValueError(f"{filename}: expected a complete-data file")
    return times


def _load_censored(filename: str, provenance: str) -> CensoredSample:
    path = _data_path(filename)
    if path is None:
        raise DatasetMissing(
            f"dataset {filename} is not redistributed with this package. "
            f"Obtain it from {provenance} and place it as {filename} (columns "
            f"'time','status') in the package data directory or a directory "
            f"named by the {DATA_DIR_ENV_VAR} environment variable."
        )
    times, status = read_dataset_csv(path)
    if status is None:
        raise ValueError(f"{filename}: expected a censored-data file with a status column")
    return CensoredSample(times, status)


def load_rat_survival() -> np.ndarray:
    """Survival times (weeks) of 20 male rats exposed to high radiation."""
    return _load_complete("rat_survival.csv")


def load_ball_bearings() -> np.ndarray:
    """Millions of revolutions to failure for 23 deep-groove ball bearings."""
    return _load_complete("ball_bearings.csv")


def load_heart_transplant() -> CensoredSample:
    """Stanford heart transplant survival data (184 patients, censored)."""
    return _load_censored(
        "heart_transplant.csv",
        "the 'stanford2' dataset of the R 'survival' package "
        "(184 rows; use columns time and status)",
    )


def load_brake_pads() -> CensoredSample:
    """Brake-pad wear-out distances for 40 cars (9 censored)."""
    return _load_censored(
        "brake_pads.csv",
        "Lawless, 'Statistical Models and Methods for Lifetime Data', "
        "Table 6.11 (40 cars, 9 still on their original pads)",
    )
