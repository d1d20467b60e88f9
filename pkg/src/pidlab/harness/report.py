"""results.csv and summary.txt writers."""

import csv
import io
import os
from pathlib import Path
import tempfile

import numpy as np

COLUMNS = ("experiment", "seed", "trial", "metric", "value", "bound", "satisfied")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _atomic_write(path, text):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, col)) for col in COLUMNS])
    return buf.getvalue()


def render_summary(rows):
    by_metric = {}
    for row in rows:
        by_metric.setdefault(row.metric, []).append(row)
    lines = [f"experiment: {rows[0].experiment}", f"seed: {rows[0].seed}", f"rows: {len(rows)}", ""]
    for metric, group in by_metric.items():
        values = np.array([r.value for r in group])
        line = (f"{metric}: n={len(group)} min={values.min():.6g} max={values.max():.6g} "
                f"mean={values.mean():.6g}")
        checked = [r for r in group if r.satisfied is not None]
        if checked:
            passed = sum(r.satisfied for r in checked)
            line += f" pass={passed}/{len(checked)}"
        lines.append(line)
    checked = [r for r in rows if r.satisfied is not None]
    lines += ["", f"overall: {sum(r.satisfied for r in checked)}/{len(checked)} bounded rows satisfied"]
    return "\n".join(lines) + "\n"


def emit_report(rows, output_dir):
    """Write results.csv and summary.txt into ``output_dir``; returns both paths."""
    if not rows:
        raise ValueError("no rows to report")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, summary_path = out / "results.csv", out / "summary.txt"
    _atomic_write(csv_path, render_csv(rows))
    _atomic_write(summary_path, render_summary(rows))
    return csv_path, summary_path
