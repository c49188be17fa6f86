"""Reading and writing traces and run summaries.

A trace file is a CSV table with the columns ``t_us, S, nb_mean, nr_mean,
norm`` preceded by ``#`` header lines::

    # rydberg_squeezing 0.1.0
    # config: {"mode": "ideal", ...}
    # metadata: {"model": "ideal", ...}

The header holds nothing that changes between two runs of the same
configuration. Wall times go to the summary file.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union
import io
import json

import numpy as np
import pandas

from . import __version__
from .evolution import TRACE_COLUMNS, SqueezingSample, SqueezingTrace

HEADER_PREFIX = "# "
PACKAGE_NAME = "rydberg_squeezing"


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars, arrays and complex numbers to JSON types."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def _header_lines(config: Optional[Dict[str, Any]], metadata: Dict[str, Any]):
    lines = [f"{HEADER_PREFIX}{PACKAGE_NAME} {__version__}"]
    for key, block in (("config", config), ("metadata", metadata)):
        if block is not None:
            dumped = json.dumps(to_jsonable(block), sort_keys=True)
            lines.append(f"{HEADER_PREFIX}{key}: {dumped}")
    return lines


def trace_to_csv(trace: SqueezingTrace, config: Optional[Dict[str, Any]] = None) -> str:
    """Render ``trace`` (and the configuration that produced it) as CSV text."""
    buffer = io.StringIO()
    buffer.write("\n".join(_header_lines(config, trace.metadata)) + "\n")
    trace.to_dataframe().to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
    return buffer.getvalue()


def write_trace(
    trace: SqueezingTrace,
    path: Union[str, Path],
    config: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(trace_to_csv(trace, config))
    return path


def _parse_header(lines) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    blocks = {"config": {}, "metadata": {}}
    for line in lines:
        content = line[len(HEADER_PREFIX) :].strip()
        key, _, value = content.partition(": ")
        if key in blocks and value:
            blocks[key] = json.loads(value)
    return blocks["config"], blocks["metadata"]


def read_trace(path: Union[str, Path]) -> SqueezingTrace:
    """Read a trace file written by ``write_trace``.

    The configuration echo is returned under ``metadata["config"]``. Only the
    tabulated columns are restored in the samples.
    """
    with open(path, "r") as f:
        text = f.read()
    header = [line for line in text.splitlines() if line.startswith("#")]
    config, metadata = _parse_header(header)
    table = pandas.read_csv(io.StringIO(text), comment="#")
    missing = set(TRACE_COLUMNS) - set(table.columns)
    if missing:
        raise ValueError(f"Trace file {path} lacks the columns {sorted(missing)}")
    samples = [
        SqueezingSample(
            t=row.t_us, s_factor=row.S, nb_mean=row.nb_mean, nr_mean=row.nr_mean, norm=row.norm
        )
        for row in table.itertuples(index=False)
    ]
    if config:
        metadata["config"] = config
    return SqueezingTrace(samples=samples, metadata=metadata)


def summary_to_text(summary: Dict[str, Any]) -> str:
    """``key=value`` lines in sorted key order. Non-string values are JSON-encoded."""
    lines = []
    for key in sorted(summary):
        value = to_jsonable(summary[key])
        lines.append(f"{key}={value if isinstance(value, str) else json.dumps(value)}")
    return "\n".join(lines) + "\n"


def write_summary(summary: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(summary_to_text(summary))
    return path


def read_summary(path: Union[str, Path]) -> Dict[str, Any]:
    summary = {}
    with open(path, "r") as f:
        for line in f:
            key, separator, value = line.rstrip("\n").partition("=")
            if not separator:
                continue
            try:
                summary[key] = json.loads(value)
            except json.JSONDecodeError:
                summary[key] = value
    return summary


@dataclass
class TraceComparison:
    """Relative deviation of the squeezing factor of two traces over a window."""

    window: Tuple[float, float]
    n_points: int
    max_relative_deviation: float
    mean_relative_deviation: float

    def to_dict(self) -> dict:
        return {
            "window_start": self.window[0],
            "window_end": self.window[1],
            "n_points": self.n_points,
            "max_relative_deviation": self.max_relative_deviation,
            "mean_relative_deviation": self.mean_relative_deviation,
        }


def compare_traces(
    a: SqueezingTrace,
    b: SqueezingTrace,
    window: Optional[Tuple[float, float]] = None,
) -> TraceComparison:
    """Compare S of ``a`` against ``b`` at the times of ``a`` inside ``window``.

    ``b`` is interpolated linearly in t. The deviation is ``|S_a - S_b| / S_b``.
    Without ``window`` the whole overlap of the two time grids is used.

    Raises
    ------
    ValueError
        If the traces are for different atom numbers, or if the window holds
        no time of ``a`` within the range of ``b``.
    """
    n_a, n_b = a.metadata.get("n_atoms"), b.metadata.get("n_atoms")
    if n_a is not None and n_b is not None and n_a != n_b:
        raise ValueError(f"Cannot compare traces for N={n_a} and N={n_b}")
    start = max(a.times[0], b.times[0])
    end = min(a.times[-1], b.times[-1])
    if window is not None:
        start, end = max(start, window[0]), min(end, window[1])
    times = a.times[(a.times >= start) & (a.times <= end)]
    if start > end or times.size == 0:
        raise ValueError(
            f"The time grids [{a.times[0]}, {a.times[-1]}] and [{b.times[0]}, {b.times[-1]}] "
            f"share no point in the window {window}"
        )
    s_a = np.interp(times, a.times, a.s_factors)
    s_b = np.interp(times, b.times, b.s_factors)
    deviations = np.abs(s_a - s_b) / np.abs(s_b)
    return TraceComparison(
        window=(float(start), float(end)),
        n_points=int(times.size),
        max_relative_deviation=float(deviations.max()),
        mean_relative_deviation=float(deviations.mean()),
    )
