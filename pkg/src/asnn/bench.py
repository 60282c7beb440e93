"""Timing harness comparing the sequential and parallel evaluators.

Default protocol: the parallel evaluator is timed over 10 repetitions and
the sequential one over 5, each after ``warmup`` untimed runs, using a
monotonic nanosecond clock around the activation call only. Segmentation
and flattening happen once per network beforehand unless
``include_preprocessing`` is set.
"""

from __future__ import annotations

import csv
import logging
import os
import platform
import statistics
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Literal, Sequence

import numba

from .layout import flatten
from .network import Network
from .parallel import ParallelConfig, eval_parallel
from .segmentation import depth, segment
from .sequential import eval_sequential

log = logging.getLogger(__name__)

SEQ_REPS = 5
PAR_REPS = 10

TIMINGS_HEADER = [
    "network_id",
    "connections",
    "layers",
    "backend",
    "repetitions",
    "mean_time_us",
    "stddev_us",
]
SPEEDUP_HEADER = ["network_id", "connections", "layers", "speedup"]

BackendName = Literal["sequential", "parallel"]
_BACKEND_ORDER = {"sequential": 0, "parallel": 1}


class TimingError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchRecord:
    network_id: str
    connections: int
    layers: int
    backend: BackendName
    repetitions: int
    mean_time_us: float
    stddev_us: float


@dataclass(frozen=True)
class SpeedupRecord:
    network_id: str
    connections: int
    layers: int
    speedup: float


@dataclass
class BenchReport:
    records: list[BenchRecord] = field(default_factory=list)
    speedups: list[SpeedupRecord] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)


def time_repeated(fn: Callable[[], object], repetitions: int, warmup: int) -> list[float]:
    """Durations of ``repetitions`` calls in microseconds, after ``warmup`` calls."""
    for _ in range(warmup):
        fn()
    out = []
    for _ in range(repetitions):
        t0 = time.perf_counter_ns()
        fn()
        dt = time.perf_counter_ns() - t0
        if dt <= 0:
            raise TimingError(f"non-positive duration {dt} ns from the monotonic clock")
        out.append(dt / 1000.0)
    return out


def _summary(samples: Sequence[float]) -> tuple[float, float]:
    mean = statistics.fmean(samples)
    sd = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return mean, sd


def hardware_description() -> str:
    model = platform.processor() or platform.machine()
    try:
        with open("/proc/cpuinfo", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("model name"):
                    model = line.split(":", 1)[1].strip()
                    break
    except OSError:
        pass
    return f"{model}; {os.cpu_count()} logical cpu(s); {platform.system()} {platform.machine()}"


def run_bench(
    corpus: Iterable[Network] | dict[str, Network],
    cfg: ParallelConfig = ParallelConfig(),
    warmup_runs: int = 1,
    *,
    reps_seq: int = SEQ_REPS,
    reps_par: int = PAR_REPS,
    input_value: float = 0.5,
    include_preprocessing: bool = False,
) -> BenchReport:
    """Benchmark every network of ``corpus`` one at a time.

    ``corpus`` is either a mapping of names to networks or a plain iterable,
    in which case networks are named ``net0000``, ``net0001``, ... A network
    that fails to segment or evaluate is skipped and listed in
    ``report.failures``.
    """
    if warmup_runs < 1:
        raise ValueError("warmup_runs must be at least 1")
    if reps_seq < 1 or reps_par < 1:
        raise ValueError("repetition counts must be at least 1")
    if isinstance(corpus, dict):
        items = list(corpus.items())
    else:
        items = [(f"net{k:04d}", net) for k, net in enumerate(corpus)]

    report = BenchReport()
    report.metadata = {
        "hardware": hardware_description(),
        "workers": str(cfg.resolved_workers()),
        "engine": cfg.engine,
        "warmup_runs": str(warmup_runs),
        "reps_sequential": str(reps_seq),
        "reps_parallel": str(reps_par),
        "protocol_overrides": _overrides(reps_seq, reps_par),
        "include_preprocessing": str(include_preprocessing).lower(),
        "input_value": repr(float(input_value)),
        "numba": numba.__version__,
        "python": sys.version.split()[0],
    }

    for name, net in items:
        try:
            seq_rec, par_rec = _bench_one(
                name, net, cfg, warmup_runs, reps_seq, reps_par, input_value, include_preprocessing
            )
        except Exception as exc:  # recorded, the sweep goes on
            log.warning("benchmark of %s failed: %s", name, exc)
            report.failures.append((name, f"{type(exc).__name__}: {exc}"))
            continue
        report.records += [seq_rec, par_rec]
        report.speedups.append(
            SpeedupRecord(
                name,
                seq_rec.connections,
                seq_rec.layers,
                seq_rec.mean_time_us / par_rec.mean_time_us,
            )
        )
    try:
        report.metadata["threading_layer"] = numba.threading_layer()
    except ValueError:
        report.metadata["threading_layer"] = "none"
    return report


def _overrides(reps_seq: int, reps_par: int) -> str:
    changed = []
    if reps_seq != SEQ_REPS:
        changed.append(f"reps_sequential={reps_seq}")
    if reps_par != PAR_REPS:
        changed.append(f"reps_parallel={reps_par}")
    return ",".join(changed) or "none"


def _bench_one(name, net, cfg, warmup, reps_seq, reps_par, value, include_preprocessing):
    assignment = segment(net)
    layout = flatten(net, assignment)
    inputs = [value] * len(net.inputs)

    if include_preprocessing:

        def run_seq():
            eval_sequential(flatten(net, segment(net)), inputs)

        def run_par():
            eval_parallel(flatten(net, segment(net)), inputs, cfg)

    else:

        def run_seq():
            eval_sequential(layout, inputs)

        def run_par():
            eval_parallel(layout, inputs, cfg)

    conns, layers = len(net.connections), depth(assignment)
    seq_mean, seq_sd = _summary(time_repeated(run_seq, reps_seq, warmup))
    par_mean, par_sd = _summary(time_repeated(run_par, reps_par, warmup))
    return (
        BenchRecord(name, conns, layers, "sequential", reps_seq, seq_mean, seq_sd),
        BenchRecord(name, conns, layers, "parallel", reps_par, par_mean, par_sd),
    )


def csv_paths(prefix: str | os.PathLike) -> tuple[Path, Path, Path]:
    prefix = str(prefix)
    return Path(prefix + ".timings.csv"), Path(prefix + ".speedup.csv"), Path(prefix + ".meta")


def write_csv(
    records: Iterable[BenchRecord],
    speedups: Iterable[SpeedupRecord],
    prefix: str | os.PathLike,
    metadata: dict[str, str] | None = None,
) -> tuple[Path, Path, Path]:
    """Write ``<prefix>.timings.csv``, ``<prefix>.speedup.csv`` and ``<prefix>.meta``."""
    timings_path, speedup_path, meta_path = csv_paths(prefix)
    rows = sorted(records, key=lambda r: (r.network_id, _BACKEND_ORDER[r.backend]))
    ups = sorted(speedups, key=lambda r: r.network_id)
    for r in rows:
        if not r.mean_time_us > 0:
            raise TimingError(f"{r.network_id}: mean time must be positive")
    try:
        with open(timings_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TIMINGS_HEADER)
            for r in rows:
                w.writerow(
                    [
                        r.network_id,
                        r.connections,
                        r.layers,
                        r.backend,
                        r.repetitions,
                        repr(r.mean_time_us),
                        repr(r.stddev_us),
                    ]
                )
        with open(speedup_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SPEEDUP_HEADER)
            for s in ups:
                w.writerow([s.network_id, s.connections, s.layers, repr(s.speedup)])
        with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"{key}={value}\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write benchmark output: {exc.strerror}", exc.filename) from exc
    return timings_path, speedup_path, meta_path


def read_csv(prefix: str | os.PathLike) -> tuple[list[BenchRecord], list[SpeedupRecord]]:
    timings_path, speedup_path, _ = csv_paths(prefix)
    with open(timings_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader) != TIMINGS_HEADER:
            raise ValueError(f"{timings_path}: unexpected header")
        records = [
            BenchRecord(r[0], int(r[1]), int(r[2]), r[3], int(r[4]), float(r[5]), float(r[6]))
            for r in reader
        ]
    with open(speedup_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader) != SPEEDUP_HEADER:
            raise ValueError(f"{speedup_path}: unexpected header")
        speedups = [SpeedupRecord(r[0], int(r[1]), int(r[2]), float(r[3])) for r in reader]
    return records, speedups


def read_meta(prefix: str | os.PathLike) -> dict[str, str]:
    _, _, meta_path = csv_paths(prefix)
    out = {}
    for line in meta_path.read_text(encoding="utf-8").splitlines():
        if line:
            key, _, value = line.partition("=")
            out[key] = value
    return out
