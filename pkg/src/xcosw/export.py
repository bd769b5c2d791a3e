"""Result serialization: CSV for spreadsheets, JSON for the HTTP API.

Floats are printed with repr(), which Python guarantees to round-trip
bit-exactly, so CSV → parse → CSV is the identity.
"""

from __future__ import annotations

import csv
import io
import json

from .solver import SimulationResult

__all__ = ["export_csv", "parse_csv", "result_to_json", "result_from_json"]


def export_csv(result: SimulationResult) -> bytes:
    """Header `t,<probe ids...>`, one row per time point, '\\n' line ends."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = sorted(result.signals)
    writer.writerow(["t", *names])
    columns = [result.signals[name] for name in names]
    for i, t in enumerate(result.times):
        writer.writerow([repr(float(t)), *(repr(float(col[i])) for col in columns)])
    return buf.getvalue().encode("utf-8")


def parse_csv(data: bytes | str) -> SimulationResult:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = list(csv.reader(io.StringIO(data)))
    if not rows or not rows[0] or rows[0][0] != "t":
        raise ValueError("not a result CSV: first header column must be 't'")
    names = rows[0][1:]
    times = []
    signals: dict[str, list[float]] = {name: [] for name in names}
    for row in rows[1:]:
        if not row:
            continue
        times.append(float(row[0]))
        for name, cell in zip(names, row[1:], strict=True):
            signals[name].append(float(cell))
    return SimulationResult(times=times, signals=signals, metadata={"source": "csv"})


def result_to_json(result: SimulationResult) -> dict:
    return {
        "times": list(result.times),
        "signals": {k: list(v) for k, v in result.signals.items()},
        "metadata": dict(result.metadata),
    }


def result_from_json(obj) -> SimulationResult:
    if not isinstance(obj, dict) or "times" not in obj or "signals" not in obj:
        raise ValueError("not a result document: expected 'times' and 'signals'")
    return SimulationResult(
        times=[float(t) for t in obj["times"]],
        signals={str(k): [float(v) for v in vs] for k, vs in obj["signals"].items()},
        metadata=dict(obj.get("metadata", {})),
    )


def dumps_result(result: SimulationResult) -> bytes:
    return json.dumps(result_to_json(result), sort_keys=True).encode("utf-8")
