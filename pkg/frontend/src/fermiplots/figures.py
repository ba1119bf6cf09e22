"""Three-panel figure builders for the two stability studies.

The ground-state figure shows (a) error vs system size per (J, delta),
(b) the large-n plateau error vs delta with the stored power-law guide,
and (c) the plateau error across the coupling axis.  The noisy-ramp figure
shows (a) finite-size convergence of the clean energy density, (b) the
error vs ramp time per delta with its hardware floor, and (c) the
floor-crossing time against inverse precision with the stored scaling fit.

Panels whose input rows are absent are skipped with a warning instead of
failing the whole figure.
"""

from __future__ import annotations

import warnings

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from fermiplots.io import guide_curve, mean_errors

matplotlib.rcParams["svg.hashsalt"] = "fermiplots"

_SAVE_META = {"png": {"Software": "fermiplots"}, "svg": {"Date": None}}


def _save(fig, out_prefix: str, formats) -> list[str]:
    paths = []
    for fmt in formats:
        path = f"{out_prefix}.{fmt}"
        fig.savefig(path, metadata=_SAVE_META.get(fmt, {}))
        paths.append(path)
    plt.close(fig)
    return paths


def render_fig2(records, summary, out_prefix: str, formats=("png", "svg")) -> list[str]:
    """Ground-state stability panels from an ssh-stability run."""
    df = records[records["experiment"] == "ssh-stability"]
    if df.empty:
        raise ValueError("no ssh-stability records in the input")
    fits = summary.get("fits", {})
    panel_c = summary.get("summary", {}).get("panel_c")

    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    ax_a, ax_b, ax_c = axes

    # (a) error vs n, one curve per (J, delta)
    main_J = sorted(df["J"].dropna().unique())
    cell = mean_errors(df, ["J", "delta", "n_sites"])
    drew_a = False
    for J in main_J:
        for delta in sorted(cell[cell["J"] == J]["delta"].unique()):
            rows = cell[(cell["J"] == J) & (cell["delta"] == delta)]
            if len(rows) < 2:
                continue
            ax_a.plot(
                rows["n_sites"], rows["abs_error"], "o-",
                label=f"J={J:g}, $\\delta$={delta:g}", markersize=3,
            )
            drew_a = True
    if drew_a:
        ax_a.set_xscale("log")
        ax_a.set_yscale("log")
        ax_a.set_xlabel("sites n")
        ax_a.set_ylabel("mean error")
        ax_a.set_title("(a) error vs size")
        ax_a.legend(fontsize=6)
    else:
        warnings.warn("panel (a) skipped: need at least two sizes per cell")
        ax_a.set_visible(False)

    # (b) plateau error vs delta with the stored fit as a guide line
    n_max = int(df["n_sites"].max())
    drew_b = False
    for J in main_J:
        rows = cell[(cell["J"] == J) & (cell["n_sites"] == n_max)]
        if len(rows) < 2:
            continue
        ax_b.plot(rows["delta"], rows["abs_error"], "o", label=f"J={J:g}", markersize=4)
        fit = fits.get(f"plateau-vs-delta:J={J:g}")
        if fit:
            xs = np.geomspace(rows["delta"].min(), rows["delta"].max(), 50)
            ax_b.plot(
                xs, guide_curve(fit, xs), "--",
                label=f"$\\delta^{{{fit['exponent']:.2f}}}$ fit",
            )
        drew_b = True
    if drew_b:
        ax_b.set_xscale("log")
        ax_b.set_yscale("log")
        ax_b.set_xlabel("$\\delta$")
        ax_b.set_ylabel(f"plateau error (n={n_max})")
        ax_b.set_title("(b) plateau error vs hardware error")
        ax_b.legend(fontsize=6)
    else:
        warnings.warn("panel (b) skipped: need a delta sweep at the largest size")
        ax_b.set_visible(False)

    # (c) plateau error across the coupling axis
    if panel_c and panel_c.get("curve"):
        curve = panel_c["curve"]
        ax_c.plot(
            [row["J"] for row in curve],
            [row["mean_abs_error"] for row in curve],
            "o-",
            markersize=3,
        )
        ax_c.axvline(panel_c["argmax_J"], color="gray", linestyle=":")
        ax_c.set_xlabel("J")
        ax_c.set_ylabel("mean error")
        ax_c.set_title(
            f"(c) error vs coupling ($\\delta$={panel_c['delta']:g}, "
            f"peak at J={panel_c['argmax_J']:g})"
        )
    else:
        warnings.warn("panel (c) skipped: no coupling-scan data in the summary")
        ax_c.set_visible(False)

    fig.tight_layout()
    return _save(fig, out_prefix, formats)


def render_fig3(
    records,
    summary,
    out_prefix: str,
    thermo_records=None,
    formats=("png", "svg"),
) -> list[str]:
    """Noisy adiabatic-preparation panels from an adiabatic run.

    Panel (a) draws the finite-size convergence points from a
    thermo-extrapolate record file when one is supplied; the guide line is
    the finite-size fit stored in the adiabatic summary either way.
    """
    df = records[records["experiment"] == "adiabatic"]
    if df.empty:
        raise ValueError("no adiabatic records in the input")
    fits = summary.get("fits", {})
    floors = summary.get("summary", {}).get("floors", [])

    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    ax_a, ax_b, ax_c = axes

    # (a) finite-size convergence of the clean model
    fs_fit = fits.get("finite-size")
    drew_a = False
    if thermo_records is not None:
        tdf = thermo_records[thermo_records["experiment"] == "thermo-extrapolate"]
        if not tdf.empty:
            ax_a.plot(tdf["n_sites"], tdf["abs_error"], "o", markersize=4, label="data")
            drew_a = True
    if fs_fit:
        xs = (
            np.geomspace(tdf["n_sites"].min(), tdf["n_sites"].max(), 50)
            if drew_a
            else np.geomspace(32, 1024, 50)
        )
        ax_a.plot(
            xs, guide_curve(fs_fit, xs), "--",
            label=f"$n^{{{fs_fit['exponent']:.2f}}}$ fit",
        )
        drew_a = True
    if drew_a:
        ax_a.set_xscale("log")
        ax_a.set_yscale("log")
        ax_a.set_xlabel("sites n")
        ax_a.set_ylabel("$|e(n) - e_*|$")
        ax_a.set_title("(a) convergence to the thermodynamic limit")
        ax_a.legend(fontsize=7)
    else:
        warnings.warn("panel (a) skipped: no finite-size data or stored fit")
        ax_a.set_visible(False)

    # (b) error vs ramp time per delta, with floors
    cell = mean_errors(df, ["delta", "T"])
    floor_by_delta = {row["delta"]: row for row in floors}
    for delta in sorted(cell["delta"].unique()):
        rows = cell[cell["delta"] == delta]
        line = ax_b.plot(
            rows["T"], rows["abs_error"], "o-", markersize=3, label=f"$\\delta$={delta:g}"
        )[0]
        if delta in floor_by_delta:
            ax_b.axhline(
                floor_by_delta[delta]["floor"],
                color=line.get_color(),
                linestyle=":",
                linewidth=0.8,
            )
    ax_b.set_xscale("log")
    ax_b.set_yscale("log")
    ax_b.set_xlabel("ramp time T")
    ax_b.set_ylabel("error vs thermodynamic limit")
    ax_b.set_title("(b) noisy ramp: hardware-limited floors")
    ax_b.legend(fontsize=7)

    # (c) floor-crossing time vs inverse precision
    runtime_fit = fits.get("runtime-vs-precision")
    if len(floors) >= 2:
        xs = np.array([1.0 / row["floor"] for row in floors])
        ys = np.array([row["T_star"] for row in floors])
        ax_c.plot(xs, ys, "o", markersize=5, label="data")
        if runtime_fit:
            grid = np.geomspace(xs.min(), xs.max(), 50)
            ax_c.plot(
                grid, guide_curve(runtime_fit, grid), "--",
                label=f"$T \\sim \\epsilon^{{-{runtime_fit['exponent']:.2f}}}$",
            )
        ax_c.set_xscale("log")
        ax_c.set_yscale("log")
        ax_c.set_xlabel("$1/\\epsilon_{floor}$")
        ax_c.set_ylabel("$T_*$")
        ax_c.set_title("(c) runtime vs achieved precision")
        ax_c.legend(fontsize=7)
    else:
        warnings.warn("panel (c) skipped: need floors for at least two deltas")
        ax_c.set_visible(False)

    fig.tight_layout()
    return _save(fig, out_prefix, formats)
