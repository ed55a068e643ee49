"""Report emission: CSV, JSON and plotter-friendly two-column text files.

Floats are written with ``repr`` (shortest round-tripping form), non-finite
values become empty CSV cells / JSON null, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
import os

from .harness import ROW_COLUMNS, ExperimentReport

FORMATS = ("csv", "json", "plotdata")
FIT_COLUMNS = ("estimator", "d", "d0", "h", "alpha", "slope", "stderr", "r_squared", "points")


def _clean(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):
        return _clean(v.item())
    return v


def _cell(v) -> str:
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_table(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])


def report_payload(report: ExperimentReport) -> dict:
    return _clean({"scenario": report.scenario, "config": report.config, "rows": report.rows,
                   "rate_fits": report.rate_fits, "summary": report.summary})


def _curve_name(est, d, d0, h, a) -> str:
    return f"{est}_d{d}_d0{d0}_h{h!r}_alpha{a!r}"


def emit_report(report: ExperimentReport, fmt: str, out_dir) -> list[str]:
    """Write the report in one format under ``out_dir``; returns the paths written.

    csv: ``results.csv`` (one row per cell and estimator) and ``rate_fits.csv``.
    json: ``report.json`` (UTF-8, sorted keys).
    plotdata: per curve ``<curve>.dat`` with ``n mean_excess`` lines and
    ``<curve>.stderr.dat`` with ``n se_excess`` lines.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    if fmt == "csv":
        p = os.path.join(out_dir, "results.csv")
        _write_table(p, ROW_COLUMNS, report.rows)
        q = os.path.join(out_dir, "rate_fits.csv")
        _write_table(q, FIT_COLUMNS, report.rate_fits)
        paths += [p, q]
    elif fmt == "json":
        p = os.path.join(out_dir, "report.json")
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(report_payload(report), fh, sort_keys=True, indent=1, allow_nan=False)
            fh.write("\n")
        paths.append(p)
    else:
        curves: dict = {}
        for r in report.rows:
            curves.setdefault((r["estimator"], r["d"], r["d0"], r["h"], r["alpha"]), []).append(r)
        for key, rs in curves.items():
            rs = sorted(rs, key=lambda r: r["n"])
            base = os.path.join(out_dir, _curve_name(*key))
            for suffix, col in ((".dat", "mean_excess"), (".stderr.dat", "se_excess")):
                with open(base + suffix, "w", encoding="utf-8") as fh:
                    fh.write(f"# n {col}\n")
                    for r in rs:
                        fh.write(f"{r['n']} {_cell(r[col]) or 'nan'}\n")
                paths.append(base + suffix)
    return paths
