"""Report serialization and flat-table export."""

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

from .suites import Report

DENSITY_KINDS = ("EE", "BB", "EE-naive", "EE-correction")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(report, timestamp=False):
    d = _clean(report.to_dict())
    if timestamp:
        d["exported_at"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(d, sort_keys=True, indent=1) + "\n"


def save(report, path):
    Path(path).write_text(dumps(report))


def load(path):
    try:
        return Report.from_dict(json.loads(Path(path).read_text()))
    except (OSError, ValueError, KeyError) as exc:
        raise OSError(f"cannot read report {path}: {exc}") from None


def _csv_text(header_lines, columns, rows):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else ("" if v is None else v) for v in r])
    return buf.getvalue()


def residual_rows(report):
    for a in report.analyses:
        for r in a["residuals"]:
            yield [a["name"], a["status"], r["omega"], r["quantity"], r["value"]]


def density_rows(report):
    d = report.densities
    if not d:
        return
    z = d["nodes"]
    n = len(z)
    for k, om in enumerate(d["omegas"]):
        arrays = [d["spectral"][kind][k] for kind in DENSITY_KINDS]
        for i in range(n):
            for j in range(n):
                row = [float(om), float(z[i]), float(z[j])]
                for a in arrays:
                    row += [float(a["re"][i][j]), float(a["im"][i][j])]
                yield row


def integrated_rows(report):
    d = report.densities
    if not d:
        return
    z = d["nodes"]
    kinds = [k for k in DENSITY_KINDS if k in d["integrated"]]
    for i in range(len(z)):
        for j in range(len(z)):
            row = [float(z[i]), float(z[j])]
            for kind in kinds:
                a = d["integrated"][kind]
                row += [float(a["re"][i][j]), float(a["im"][i][j])]
            yield row


def _pairs(kinds):
    cols = []
    for k in kinds:
        cols += [f"{k}_re", f"{k}_im"]
    return cols


def export(report, fmt, out_dir=".", stem=None, timestamp=False):
    """Write machine-readable files for ``report``; return their paths.

    ``json`` writes one canonical report file. ``csv`` writes three flat
    tables: residuals (one row per analysis, frequency and quantity),
    frequency-resolved densities (one row per frequency and node pair,
    frequency-major then row-major, with real and imaginary parts
    interleaved) and band-limited integrated tensors.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or report.scenario
    stamp = [f"exported_at: {datetime.now(timezone.utc).isoformat()}"] if timestamp else []
    if fmt == "json":
        path = out / f"{stem}.json"
        path.write_text(dumps(report, timestamp))
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown export format {fmt!r}")
    head = [f"scenario: {report.scenario}", f"version: {report.version}",
            f"config_hash: {report.config_hash}"] + stamp
    files = {
        f"{stem}_residuals.csv": _csv_text(
            head + ["one row per (analysis, omega, quantity); empty omega = frequency independent"],
            ["analysis", "status", "omega", "quantity", "value"], residual_rows(report)),
        f"{stem}_densities.csv": _csv_text(
            head + ["complex kernels: columns omega, z_row, z_col, then real and imaginary "
                    "parts interleaved per quantity",
                    "rows ordered omega-major, then row-major over (z_row, z_col)"],
            ["omega", "z_row", "z_col"] + _pairs(DENSITY_KINDS), density_rows(report)),
        f"{stem}_integrated.csv": _csv_text(
            head + ["band-limited frequency integrals; columns z_row, z_col, then real and "
                    "imaginary parts interleaved per quantity; rows row-major"],
            ["z_row", "z_col"] + _pairs(DENSITY_KINDS), integrated_rows(report)),
    }
    paths = []
    for name, text in files.items():
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths
