"""Canonical report serialization and figure rendering.

JSON output is byte-stable: keys sorted, floats printed with 17
significant digits, newline-terminated.  CSV rows follow the same field
order.  Figures are rendered headlessly to files.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Optional

SCHEMA = "tiling-lab/1"


def _encode(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            raise ValueError(f"non-finite float {obj} in canonical output")
        out.append(format(obj, ".17g"))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"')
                   .replace("\n", "\\n").replace("\r", "\\r")
                   .replace("\t", "\\t") + '"')
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise ValueError(f"non-string key {key!r} in canonical output")
            if i:
                out.append(",")
            _encode(key, out)
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    else:
        raise ValueError(f"cannot canonicalize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Deterministic JSON text for `obj`, newline-terminated."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out) + "\n"


def report_csv(rows: list[dict], fields: Optional[list[str]] = None) -> str:
    """CSV text with a fixed field order (sorted keys unless given)."""
    if not rows:
        return ""
    if fields is None:
        fields = sorted({k for row in rows for k in row})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k)) for k in fields})
    return buf.getvalue()


def _csv_cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return value


def render_histogram(histogram, path: str, title: str = "") -> None:
    """Bar chart of good-subset counts by subset size, written to `path`."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sizes = list(range(len(histogram)))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(sizes, list(histogram), color="#31688e")
    ax.set_xlabel("subset size |S|")
    ax.set_ylabel("subsets whose induced graph has a factor")
    if title:
        ax.set_title(title)
    ax.set_xticks(sizes)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_trial_fractions(fractions, path: str, exact: Optional[float] = None,
                           title: str = "") -> None:
    """Running-estimate plot for sampled robustness runs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(fractions) + 1), list(fractions), color="#31688e",
            linewidth=1.0, label="running estimate")
    if exact is not None:
        ax.axhline(exact, color="#d95f02", linestyle="--", label="exact fraction")
        ax.legend()
    ax.set_xlabel("trials")
    ax.set_ylabel("estimated probability")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
