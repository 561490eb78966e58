"""Parameter sweeps over (g, phi, N) grids with pluggable per-cell tasks.

A sweep is described by a SweepSpec: a base ModelParams, one or two axes
(g or phi as linear ranges, N as an explicit size list), and a list of
named tasks drawn from the registry below.  run_sweep evaluates every
cell in row-major order (first axis outer) and returns a ResultGrid;
emit writes it as CSV, JSON, or both.

Determinism contract: the CSV produced by two runs of the same spec is
byte-identical except for the single "# generated" timestamp line.  Per
cell wall times are therefore recorded in the grid and in the JSON
metadata but never in the CSV.  Workers (CHIRALCHAIN_WORKERS, default:
logical cores) split the flat cell list into contiguous blocks; results
are reassembled by index, so the worker count never changes the output.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import __version__
from .params import ModelParams
from . import bloch
from . import ed
from . import lswt
from . import quadstate
from . import topology

TaskValue = Union[float, np.ndarray]

_AXIS_NAMES = ("g", "phi", "N")
_FORMATS = ("csv", "json", "both")
_SCHEMA = "sweep-grid v1"


class TaskSkip(Exception):
    """Raised by a task to mark the cell skipped instead of failed."""


# ---------------------------------------------------------------------------
# Task registry

TASKS: dict[str, Callable[[ModelParams], TaskValue]] = {}


def register_task(name: str):
    """Decorator adding a ModelParams -> scalar/vector callable to TASKS."""
    def wrap(fn: Callable[[ModelParams], TaskValue]):
        if name in TASKS:
            raise ValueError(f"task {name!r} already registered")
        TASKS[name] = fn
        return fn
    return wrap


def _even_covariance(p: ModelParams) -> quadstate.CovarianceData:
    # even-parity sector: the global ground state everywhere between the
    # critical lines, and one of the two degenerate states beyond them
    return quadstate.ground_covariance(topology.build_realspace(p), parity="even")


@register_task("z2_invariant")
def _task_z2(p: ModelParams) -> float:
    return float(topology.z2_invariant(p))


@register_task("gap")
def _task_gap(p: ModelParams) -> float:
    return bloch.gap_scan(p)[0]


@register_task("critical_coupling")
def _task_gc(p: ModelParams) -> float:
    gc = bloch.critical_coupling(p.omega0, p.Omega0, p.J, p.phi)
    return float("nan") if gc is None else gc


@register_task("schmidt_gap")
def _task_schmidt_gap(p: ModelParams) -> float:
    return quadstate.entanglement_ff(_even_covariance(p), p.N // 2).schmidt_gap


@register_task("entropy")
def _task_entropy(p: ModelParams) -> float:
    return quadstate.entanglement_ff(_even_covariance(p), p.N // 2).entropy


@register_task("rdm_spectrum")
def _task_rdm_spectrum(p: ModelParams) -> np.ndarray:
    return quadstate.entanglement_ff(_even_covariance(p), p.N // 2).rdm_spectrum


@register_task("chirality_ff")
def _task_chirality(p: ModelParams) -> float:
    return quadstate.chirality_ff(_even_covariance(p), chain="B")


@register_task("order_parameter")
def _task_order_parameter(p: ModelParams) -> float:
    return quadstate.order_parameter_ff(p)


@register_task("zero_mode")
def _task_zero_mode(p: ModelParams) -> np.ndarray:
    zm = topology.zero_modes(p)
    return np.array([zm.E_min, zm.edge_weight])


@register_task("gs_energy_ff")
def _task_gs_energy(p: ModelParams) -> float:
    rs = topology.build_realspace(p)
    evals = np.linalg.eigvalsh(rs.matrix)
    half = evals[evals.size // 2:]
    return (rs.constant - 0.5 * float(np.sum(half))) / p.N


@register_task("ed_delta0")
def _task_ed_delta0(p: ModelParams) -> float:
    if 2 * p.N > ed.MAX_SPINS:
        raise TaskSkip(f"N = {p.N} exceeds the exact-diagonalization limit")
    return ed.gaps(p)["delta0"]


@register_task("ed_delta1")
def _task_ed_delta1(p: ModelParams) -> float:
    if 2 * p.N > ed.MAX_SPINS:
        raise TaskSkip(f"N = {p.N} exceeds the exact-diagonalization limit")
    return ed.gaps(p)["delta1"]


@register_task("lswt_threshold")
def _task_lswt_threshold(p: ModelParams) -> float:
    return lswt.instability_threshold(p, p.phi).g_c


# ---------------------------------------------------------------------------
# Spec and grid types

@dataclass(frozen=True)
class AxisSpec:
    """One sweep axis: parameter name plus the value list, in sweep order."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        if self.name not in _AXIS_NAMES:
            raise ValueError(f"axis must be one of {_AXIS_NAMES}, got {self.name!r}")
        dtype = int if self.name == "N" else float
        vals = np.asarray(self.values, dtype=dtype)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError(f"axis {self.name}: need a nonempty 1d value list")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_range(cls, name: str, lo: float, hi: float, steps: int) -> "AxisSpec":
        if name == "N":
            raise ValueError("the N axis takes an explicit list, not a range")
        if not lo <= hi:
            raise ValueError(f"axis {name}: need lo <= hi, got {lo} > {hi}")
        if steps < 1:
            raise ValueError(f"axis {name}: need steps >= 1, got {steps}")
        values = np.array([lo]) if steps == 1 else np.linspace(lo, hi, steps)
        return cls(name=name, values=values)


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    axes: tuple[AxisSpec, ...]
    tasks: tuple[str, ...]
    output_path: str = "."
    output_format: str = "csv"

    def __post_init__(self):
        axes = tuple(self.axes)
        tasks = tuple(self.tasks)
        if not 1 <= len(axes) <= 2:
            raise ValueError(f"need 1 or 2 axes, got {len(axes)}")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis {names}")
        unknown = [t for t in tasks if t not in TASKS]
        if unknown:
            raise ValueError(f"unknown tasks {unknown}; registered: {sorted(TASKS)}")
        if self.output_format not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}, got {self.output_format!r}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "tasks", tasks)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.values.size for a in self.axes)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    def cell_params(self, flat: int) -> ModelParams:
        """Parameters of cell `flat` in row-major order (first axis outer)."""
        if len(self.axes) == 1:
            coords = (flat,)
        else:
            coords = divmod(flat, self.axes[1].values.size)
        overrides = {}
        for axis, idx in zip(self.axes, coords):
            v = axis.values[idx]
            overrides[axis.name] = int(v) if axis.name == "N" else float(v)
        return dataclasses.replace(self.base, **overrides)


@dataclass(eq=False)
class ResultGrid:
    """Row-major sweep output: one task->value map and status per cell."""

    base: ModelParams
    axes: tuple[AxisSpec, ...]
    tasks: tuple[str, ...]
    cells: list[dict[str, TaskValue]]
    status: list[str]
    times: list[float] = field(default_factory=list)
    started: str = ""
    finished: str = ""

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.values.size for a in self.axes)

    def flat_index(self, *coords: int) -> int:
        if len(coords) != len(self.axes):
            raise ValueError(f"need {len(self.axes)} coordinates, got {len(coords)}")
        if len(coords) == 1:
            return coords[0]
        return coords[0] * self.axes[1].values.size + coords[1]

    def value(self, task: str, *coords: int) -> TaskValue:
        return self.cells[self.flat_index(*coords)][task]

    def task_array(self, task: str) -> np.ndarray:
        """Scalar task values reshaped to the grid shape (NaN where absent)."""
        flat = np.array([float(c.get(task, np.nan)) for c in self.cells])
        return flat.reshape(self.shape)


def grid_equal(a: ResultGrid, b: ResultGrid) -> bool:
    """Exact content equality (NaN == NaN), ignoring timestamps and times."""
    if a.base != b.base or a.tasks != b.tasks or a.status != b.status:
        return False
    if [x.name for x in a.axes] != [x.name for x in b.axes]:
        return False
    if not all(np.array_equal(x.values, y.values) for x, y in zip(a.axes, b.axes)):
        return False
    if len(a.cells) != len(b.cells):
        return False
    for ca, cb in zip(a.cells, b.cells):
        if set(ca) != set(cb):
            return False
        for key in ca:
            va, vb = np.asarray(ca[key], dtype=float), np.asarray(cb[key], dtype=float)
            if va.shape != vb.shape or not np.array_equal(va, vb, equal_nan=True):
                return False
    return True


# ---------------------------------------------------------------------------
# Execution

def worker_count() -> int:
    env = os.environ.get("CHIRALCHAIN_WORKERS")
    if env is not None:
        n = int(env)
        if n < 1:
            raise ValueError(f"CHIRALCHAIN_WORKERS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def _evaluate_cell(spec: SweepSpec, flat: int) -> tuple[dict[str, TaskValue], str, float]:
    t0 = time.perf_counter()
    values: dict[str, TaskValue] = {}
    failed = skipped = False
    try:
        p = spec.cell_params(flat)
    except Exception:
        p = None
        failed = True
    for name in spec.tasks:
        if p is None:
            values[name] = float("nan")
            continue
        try:
            values[name] = TASKS[name](p)
        except TaskSkip:
            values[name] = float("nan")
            skipped = True
        except Exception:
            values[name] = float("nan")
            failed = True
    status = "failed" if failed else ("skipped" if skipped else "ok")
    return values, status, time.perf_counter() - t0


def _run_block(spec: SweepSpec, indices: Sequence[int]):
    return [_evaluate_cell(spec, i) for i in indices]


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def run_sweep(spec: SweepSpec) -> ResultGrid:
    """Evaluate every cell exactly once; failures mark cells, never abort."""
    started = _utcnow()
    n = spec.n_cells
    workers = min(worker_count(), n)
    if workers <= 1:
        results = _run_block(spec, range(n))
    else:
        # static contiguous blocks; reassembled by index, so the split
        # never affects ordering
        blocks = np.array_split(np.arange(n), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_block, spec, blk.tolist()) for blk in blocks]
            results = [item for fut in futures for item in fut.result()]
    cells = [r[0] for r in results]
    status = [r[1] for r in results]
    times = [r[2] for r in results]
    return ResultGrid(base=spec.base, axes=spec.axes, tasks=spec.tasks,
                      cells=cells, status=status, times=times,
                      started=started, finished=_utcnow())


# ---------------------------------------------------------------------------
# Serialization

def _fmt_float(v: float) -> str:
    return repr(float(v))


def _fmt_value(v: TaskValue) -> str:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return _fmt_float(arr)
    return ";".join(_fmt_float(x) for x in arr)


def _parse_value(text: str) -> TaskValue:
    if ";" in text:
        return np.array([float(t) for t in text.split(";")])
    return float(text)


def _base_line(p: ModelParams) -> str:
    return (f"omega0={p.omega0!r} Omega0={p.Omega0!r} J={p.J!r} g={p.g!r} "
            f"phi={p.phi!r} N={p.N} boundary={p.boundary}")


def _parse_base_line(text: str) -> ModelParams:
    kw: dict = {}
    for token in text.split():
        key, _, val = token.partition("=")
        if key == "boundary":
            kw[key] = val
        elif key == "N":
            kw[key] = int(val)
        else:
            kw[key] = float(val)
    return ModelParams(**kw)


def emit(grid: ResultGrid, fmt: str = "csv", out_dir="sweep_out",
         stem: str = "sweep") -> list[Path]:
    """Write the grid under out_dir as {stem}.csv / {stem}.json.

    CSV: deterministic by construction except the "# generated" line;
    columns are axes, tasks (spec order), status.  Vectors are
    semicolon-joined.  An empty task list yields a header-only file.
    JSON: full metadata block plus native arrays and per-cell seconds.
    """
    if fmt not in _FORMATS:
        raise ValueError(f"format must be one of {_FORMATS}, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt in ("csv", "both"):
        paths.append(_write_csv(grid, out / f"{stem}.csv"))
    if fmt in ("json", "both"):
        paths.append(_write_json(grid, out / f"{stem}.json"))
    return paths


def _write_csv(grid: ResultGrid, path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {_SCHEMA} chiralchain {__version__}\n")
        fh.write(f"# generated {grid.finished or _utcnow()}\n")
        fh.write(f"# base {_base_line(grid.base)}\n")
        for axis in grid.axes:
            fh.write(f"# axis {axis.name} {axis.values.size}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([a.name for a in grid.axes] + list(grid.tasks) + ["status"])
        if not grid.tasks:
            return path
        for flat, (cell, status) in enumerate(zip(grid.cells, grid.status)):
            if len(grid.axes) == 1:
                coords = (flat,)
            else:
                coords = divmod(flat, grid.axes[1].values.size)
            row = []
            for axis, idx in zip(grid.axes, coords):
                v = axis.values[idx]
                row.append(str(int(v)) if axis.name == "N" else _fmt_float(v))
            row += [_fmt_value(cell.get(t, float("nan"))) for t in grid.tasks]
            row.append(status)
            writer.writerow(row)
    return path


def _write_json(grid: ResultGrid, path: Path) -> Path:
    doc = {
        "schema": _SCHEMA,
        "metadata": {
            "package": "chiralchain",
            "version": __version__,
            "base": dataclasses.asdict(grid.base),
            "axes": [{"name": a.name, "values": a.values.tolist()} for a in grid.axes],
            "tasks": list(grid.tasks),
            "started": grid.started,
            "finished": grid.finished,
        },
        "cells": [
            {k: (v.tolist() if isinstance(v, np.ndarray) else float(v))
             for k, v in cell.items()}
            for cell in grid.cells
        ],
        "status": list(grid.status),
        "cell_seconds": [round(t, 6) for t in grid.times],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return path


def load_grid(path) -> ResultGrid:
    """Parse a file written by emit back into a ResultGrid.

    CSV round-trips everything except wall times and the start stamp;
    JSON round-trips all fields.
    """
    path = Path(path)
    if path.suffix == ".json":
        return _load_json(path)
    return _load_csv(path)


def _load_csv(path: Path) -> ResultGrid:
    base: Optional[ModelParams] = None
    axis_meta: list[tuple[str, int]] = []
    finished = ""
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("# "):
                tag, _, rest = line[2:].partition(" ")
                if tag == "base":
                    base = _parse_base_line(rest)
                elif tag == "axis":
                    name, size = rest.split()
                    axis_meta.append((name, int(size)))
                elif tag == "generated":
                    finished = rest
                continue
            if line:
                rows.append(next(csv.reader([line])))
    if base is None or not axis_meta:
        raise ValueError(f"{path}: missing '# base' or '# axis' metadata")
    header, data = rows[0], rows[1:]
    n_axes = len(axis_meta)
    tasks = tuple(header[n_axes:-1])
    sizes = [size for _, size in axis_meta]
    n_cells = int(np.prod(sizes))

    def axis_values(col: int, name: str) -> np.ndarray:
        if n_axes == 1:
            picks = data
        elif col == 0:
            picks = data[:: sizes[1]]
        else:
            picks = data[: sizes[1]]
        cast = int if name == "N" else float
        return np.array([cast(r[col]) for r in picks], dtype=cast)

    if not tasks:
        # header-only file: rebuild axis values from the recorded spec is
        # impossible, so synthesize index placeholders of the right size
        axes = tuple(AxisSpec(name, np.arange(size) if name == "N"
                              else np.arange(size, dtype=float))
                     for name, size in axis_meta)
        return ResultGrid(base=base, axes=axes, tasks=(),
                          cells=[{} for _ in range(n_cells)],
                          status=["ok"] * n_cells, times=[0.0] * n_cells,
                          finished=finished)
    if len(data) != n_cells:
        raise ValueError(f"{path}: expected {n_cells} rows, found {len(data)}")
    axes = tuple(AxisSpec(name, axis_values(col, name))
                 for col, (name, _) in enumerate(axis_meta))
    cells = [{t: _parse_value(r[n_axes + j]) for j, t in enumerate(tasks)}
             for r in data]
    status = [r[-1] for r in data]
    return ResultGrid(base=base, axes=axes, tasks=tasks, cells=cells,
                      status=status, times=[0.0] * n_cells, finished=finished)


def _load_json(path: Path) -> ResultGrid:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    meta = doc["metadata"]
    base = ModelParams(**meta["base"])
    axes = tuple(AxisSpec(a["name"], np.asarray(a["values"])) for a in meta["axes"])
    cells = [{k: (np.asarray(v, dtype=float) if isinstance(v, list) else float(v))
              for k, v in cell.items()}
             for cell in doc["cells"]]
    return ResultGrid(base=base, axes=axes, tasks=tuple(meta["tasks"]),
                      cells=cells, status=list(doc["status"]),
                      times=list(doc.get("cell_seconds", [])),
                      started=meta.get("started", ""),
                      finished=meta.get("finished", ""))


# ---------------------------------------------------------------------------
# TOML spec files

def load_sweep_spec(path) -> SweepSpec:
    """Read a sweep description from TOML.

    Layout (top-level `tasks` must precede the table headers):
        tasks = ["z2_invariant", ...]
        [base]            # ModelParams overrides (omega0, ..., boundary)
        [axes.g]          # lo / hi / steps range table, or
        [axes]            #   N = [64, 128] style explicit lists
        [output]          # path (default '.') and format (default 'csv')
    """
    import tomli

    with open(path, "rb") as fh:
        doc = tomli.load(fh)
    unknown = set(doc) - {"base", "axes", "tasks", "output"}
    if unknown:
        raise ValueError(f"{path}: unknown top-level keys {sorted(unknown)}")
    base = ModelParams(**doc.get("base", {}))
    axes = []
    for name, val in doc.get("axes", {}).items():
        if isinstance(val, dict):
            extra = set(val) - {"lo", "hi", "steps"}
            if extra:
                raise ValueError(f"axis {name}: unknown range keys {sorted(extra)}")
            axes.append(AxisSpec.from_range(name, float(val["lo"]),
                                            float(val["hi"]), int(val["steps"])))
        else:
            axes.append(AxisSpec(name, np.asarray(val)))
    out = doc.get("output", {})
    return SweepSpec(base=base, axes=tuple(axes), tasks=tuple(doc.get("tasks", [])),
                     output_path=str(out.get("path", ".")),
                     output_format=str(out.get("format", "csv")))
