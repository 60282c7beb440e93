"""Layer-barrier data-parallel evaluator.

Every layer slice of the layout is split into ``workers`` contiguous
chunks that are activated concurrently; no worker starts layer ``k + 1``
before all writes of layer ``k`` are complete. Each node is written by
exactly one worker and sums its inputs in the stored order, so the result
is bitwise independent of scheduling.

Two host engines honour that contract:

``compiled``
    numba ``prange`` over the chunks of each layer. The end of each
    parallel loop joins all threads, which acts as the barrier.
``threads``
    Plain Python threads looping over the layers and meeting at a
    :class:`threading.Barrier`. Much slower; exists so tests can interleave
    real threads with injected delays.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass
from typing import Literal, Sequence

import numba
import numpy as np

from . import _kernels
from .layout import LayeredLayout, layer_slice_bounds
from .network import sigmoid32
from .sequential import ActivationState, prepare_state

Backend = Literal["host-parallel", "device-compute"]
Engine = Literal["compiled", "threads"]


class BackendUnavailable(RuntimeError):
    pass


def hardware_threads() -> int:
    """Concurrency the compiled engine can actually use."""
    return max(1, min(numba.config.NUMBA_NUM_THREADS, os.cpu_count() or 1))


@dataclass(frozen=True)
class ParallelConfig:
    workers: int | Literal["auto"] = "auto"
    backend: Backend = "host-parallel"
    engine: Engine = "compiled"

    def resolved_workers(self) -> int:
        if self.workers == "auto":
            return hardware_threads()
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ValueError(f"workers must be a positive integer or 'auto', got {self.workers!r}")
        return self.workers


@dataclass(frozen=True)
class DebugHooks:
    """Test-only instrumentation.

    ``delay_us`` gives a per-node delay, indexed by dense id: microseconds of
    sleep for the ``threads`` engine, spin iterations for ``compiled``.
    ``count_writes`` records how often each output slot was written.
    ``flip_weight`` negates one entry of the weight array before evaluation
    (fault injection for the verifier).
    """

    delay_us: np.ndarray | None = None
    count_writes: bool = False
    flip_weight: int | None = None


def max_layer_width(layout: LayeredLayout) -> int:
    return int(layout.nodes_per_layer.max())


# The workqueue threading layer aborts on concurrent entry.
_workqueue_lock = threading.Lock()


def _run_compiled(layout, weights, state, workers, hooks):
    nthreads = min(workers, numba.config.NUMBA_NUM_THREADS)
    previous = numba.get_num_threads()
    numba.set_num_threads(nthreads)
    try:
        args = (
            layout.nodes_per_layer,
            layout.ids,
            layout.in_ptr,
            layout.in_nodes,
            weights,
            state.inputs,
            state.outputs,
            workers,
        )
        guard = _workqueue_lock if _layer_is_workqueue() else _NullLock()
        with guard:
            if hooks is None or (hooks.delay_us is None and not hooks.count_writes):
                _kernels.eval_layers_kernel(*args)
            else:
                spin = _delays(layout, hooks)
                writes = np.zeros(layout.node_count, dtype=np.int64)
                sink = np.zeros(layout.node_count, dtype=np.float64)
                _kernels.eval_layers_debug_kernel(*args, spin, writes, sink)
                if hooks.count_writes:
                    state.write_counts = writes
    finally:
        numba.set_num_threads(previous)


def _layer_is_workqueue() -> bool:
    try:
        return numba.threading_layer() == "workqueue"
    except ValueError:
        # not initialised yet; be safe on the first call
        return True


class _NullLock:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _delays(layout, hooks):
    if hooks.delay_us is None:
        return np.zeros(layout.node_count, dtype=np.int64)
    d = np.asarray(hooks.delay_us, dtype=np.int64)
    if d.shape != (layout.node_count,):
        raise ValueError("delay_us must have one entry per layout node")
    return d


def _run_threads(layout, weights, state, workers, hooks):
    barrier = threading.Barrier(workers)
    writes = np.zeros(layout.node_count, dtype=np.int64)
    delay = None if hooks is None or hooks.delay_us is None else _delays(layout, hooks)
    errors: list[BaseException] = []
    ids, ptr, src, op, inp = layout.ids, layout.in_ptr, layout.in_nodes, state.outputs, state.inputs

    def work(rank: int) -> None:
        try:
            for cl in range(layout.total_layers):
                sid, width = layer_slice_bounds(layout, cl)
                chunk = -(-width // workers)
                lo = sid + rank * chunk
                hi = min(lo + chunk, sid + width)
                for p in range(lo, hi):
                    nid = ids[p]
                    if delay is not None and delay[nid]:
                        time.sleep(delay[nid] * 1e-6)
                    if cl == 0:
                        op[nid] = sigmoid32(inp[nid])
                    else:
                        s = np.float32(0.0)
                        for k in range(ptr[p], ptr[p + 1]):
                            s = s + weights[k] * op[src[k]]
                        op[nid] = sigmoid32(s)
                    writes[nid] += 1
                barrier.wait()
        except threading.BrokenBarrierError:
            pass
        except BaseException as exc:  # surfaced to the caller below
            errors.append(exc)
            barrier.abort()

    threads = [threading.Thread(target=work, args=(r,), daemon=True) for r in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    if hooks is not None and hooks.count_writes:
        state.write_counts = writes


def eval_parallel(
    layout: LayeredLayout,
    input_values: Sequence[float],
    cfg: ParallelConfig = ParallelConfig(),
    hooks: DebugHooks | None = None,
) -> ActivationState:
    """Evaluate ``layout`` layer by layer with ``cfg.workers`` workers.

    Returns only after every layer has been written, so the state is safe
    to read immediately.
    """
    if cfg.backend == "device-compute":
        raise BackendUnavailable("device-compute backend is not available in this build")
    if cfg.backend != "host-parallel":
        raise ValueError(f"unknown backend {cfg.backend!r}")
    workers = cfg.resolved_workers()
    state = prepare_state(layout, input_values)

    weights = layout.in_weights
    if hooks is not None and hooks.flip_weight is not None:
        weights = weights.copy()
        weights[hooks.flip_weight] = -weights[hooks.flip_weight]

    if cfg.engine == "compiled":
        _run_compiled(layout, weights, state, workers, hooks)
    elif cfg.engine == "threads":
        _run_threads(layout, weights, state, workers, hooks)
    else:
        raise ValueError(f"unknown engine {cfg.engine!r}")
    return state
