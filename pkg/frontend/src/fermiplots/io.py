"""Readers for the sweep artifacts, with schema checks."""

from __future__ import annotations

import json

import numpy as np
import pandas as pd

EXPECTED_COLUMNS = [
    "experiment",
    "J",
    "beta",
    "t",
    "T",
    "n_sites",
    "delta",
    "instance",
    "value_perturbed",
    "value_ideal",
    "abs_error",
    "diag_zero_modes",
    "diag_steps",
]

SUPPORTED_SCHEMA = 1


class SchemaError(ValueError):
    pass


def read_records(path: str) -> pd.DataFrame:
    df = pd.read_csv(path)
    if list(df.columns) != EXPECTED_COLUMNS:
        raise SchemaError(
            f"unexpected record columns in {path}: {list(df.columns)}"
        )
    return df


def read_summary(path: str) -> dict:
    with open(path) as fh:
        summary = json.load(fh)
    version = summary.get("schema_version")
    if version != SUPPORTED_SCHEMA:
        raise SchemaError(
            f"summary schema version {version} unsupported (expected {SUPPORTED_SCHEMA})"
        )
    return summary


def mean_errors(df: pd.DataFrame, by: list[str]) -> pd.DataFrame:
    """Mean absolute error per grid cell, sorted for stable plotting."""
    out = (
        df.groupby(by, dropna=False)["abs_error"]
        .mean()
        .reset_index()
        .sort_values(by)
        .reset_index(drop=True)
    )
    return out


def guide_curve(fit: dict, x: np.ndarray) -> np.ndarray:
    """Evaluate a stored power-law fit: exp(intercept) * x^exponent."""
    return np.exp(fit["intercept"]) * np.asarray(x, dtype=float) ** fit["exponent"]
