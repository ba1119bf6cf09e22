"""Command line for rendering figures from sweep artifacts."""

from __future__ import annotations

import argparse
import sys

from fermiplots.io import SchemaError, read_records, read_summary
from fermiplots.figures import render_fig2, render_fig3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fermiplots", description="Render stability-study figures"
    )
    sub = parser.add_subparsers(dest="figure", required=True)
    for name in ("fig2", "fig3"):
        p = sub.add_parser(name)
        p.add_argument("--records", required=True, help="records.csv from the sweep")
        p.add_argument("--summary", required=True, help="summary.json from the sweep")
        p.add_argument("--out", required=True, help="output path prefix (no extension)")
        p.add_argument(
            "--formats", default="png,svg", help="comma-separated image formats"
        )
        if name == "fig3":
            p.add_argument(
                "--thermo-records",
                default=None,
                help="records.csv from a thermo-extrapolate run (panel a points)",
            )
    ns = parser.parse_args(argv)
    formats = [f for f in ns.formats.split(",") if f]
    try:
        records = read_records(ns.records)
        summary = read_summary(ns.summary)
        if ns.figure == "fig2":
            paths = render_fig2(records, summary, ns.out, formats=formats)
        else:
            thermo = read_records(ns.thermo_records) if ns.thermo_records else None
            paths = render_fig3(
                records, summary, ns.out, thermo_records=thermo, formats=formats
            )
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
