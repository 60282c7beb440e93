"""Seeded generator of layered sparse networks with exact depth and size.

Nodes are placed in bands: band 0 holds the inputs, bands ``1..depth-2`` the
hidden nodes (balanced sizes) and band ``depth-1`` the outputs. Every
non-input node receives one mandatory predecessor from the band directly
before it, which pins its layer to its band index. The remaining edges are
drawn uniformly, without repetition, from all earlier-band to later-band
pairs.

Randomness comes from the PCG64 bit generator (O'Neill 2014) seeded through
numpy's ``SeedSequence``. Only raw 64-bit outputs are consumed, mapped
through the fixed transforms in :class:`_Stream`, so a seed yields the same
network on every platform and numpy release that keeps those two
algorithms.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .network import Connection, Network


class InfeasibleSpec(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    input_count: int
    output_count: int
    hidden_count: int
    connection_count: int
    target_depth: int
    weight_range: tuple[float, float] = (-1.0, 1.0)
    seed: int = 0

    def band_sizes(self) -> list[int]:
        bands = self.target_depth - 2
        if bands <= 0:
            return [self.input_count, self.output_count]
        q, r = divmod(self.hidden_count, bands)
        return [self.input_count] + [q + (k < r) for k in range(bands)] + [self.output_count]

    def max_connections(self) -> int:
        total, before = 0, 0
        for k, size in enumerate(self.band_sizes()):
            if k:
                total += size * before
            before += size
        return total

    def check(self) -> None:
        """Raise :class:`InfeasibleSpec` naming the first violated constraint."""
        if self.input_count < 1 or self.output_count < 1:
            raise InfeasibleSpec("infeasible: need at least one input and one output")
        if self.hidden_count < 0:
            raise InfeasibleSpec("infeasible: hidden count must be non-negative")
        if self.target_depth < 2:
            raise InfeasibleSpec("infeasible: depth must be at least 2")
        if self.target_depth - 2 > self.hidden_count:
            raise InfeasibleSpec(
                f"infeasible: depth exceeds hidden capacity (depth {self.target_depth} "
                f"needs at least {self.target_depth - 2} hidden nodes, got {self.hidden_count})"
            )
        if self.target_depth == 2 and self.hidden_count:
            raise InfeasibleSpec("infeasible: depth 2 leaves no band for hidden nodes")
        lo, hi = self.weight_range
        if not lo <= hi:
            raise InfeasibleSpec("infeasible: weight range is empty")
        need = self.hidden_count + self.output_count
        if self.connection_count < need:
            raise InfeasibleSpec(
                f"infeasible: {self.connection_count} connections cannot give "
                f"{need} non-input nodes an incoming edge each"
            )
        cap = self.max_connections()
        if self.connection_count > cap:
            raise InfeasibleSpec(
                f"infeasible: {self.connection_count} connections exceed the "
                f"{cap} forward pairs available"
            )

    def as_dict(self) -> dict:
        return asdict(self)


class _Stream:
    """Fixed transforms over raw PCG64 output."""

    def __init__(self, seed: int):
        self._bits = np.random.PCG64(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)

    def unit(self, size: int) -> np.ndarray:
        # top 53 bits -> [0, 1)
        raw = self._bits.random_raw(size)
        return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def below(self, bound, size: int | None = None) -> np.ndarray:
        """Integers in ``[0, bound)``; ``bound`` may be an array."""
        bound = np.asarray(bound, dtype=np.int64)
        n = bound.size if size is None else size
        k = np.floor(self.unit(n) * bound).astype(np.int64)
        # guard the product rounding up to ``bound`` for very large bounds
        return np.minimum(k, bound - 1)


def generate(spec: GenSpec) -> Network:
    spec.check()
    rng = _Stream(spec.seed)
    sizes = spec.band_sizes()
    n_in, n_out = spec.input_count, spec.output_count

    # ids: inputs first, then outputs, then hidden nodes band by band
    bands: list[np.ndarray] = [np.arange(n_in, dtype=np.int64)]
    next_id = n_in + n_out
    for size in sizes[1:-1]:
        bands.append(np.arange(next_id, next_id + size, dtype=np.int64))
        next_id += size
    bands.append(np.arange(n_in, n_in + n_out, dtype=np.int64))

    order = np.concatenate(bands)  # every node, by band
    band_start = np.cumsum([0] + sizes)
    targets = order[n_in:]
    target_band = np.repeat(np.arange(1, len(sizes)), sizes[1:])
    allowed = band_start[target_band]  # sources are order[:allowed[t]]
    cum = np.cumsum(allowed)
    prev = cum - allowed
    total_pairs = int(cum[-1]) if cum.size else 0

    # mandatory predecessor from the band just before
    prev_band_size = np.asarray(sizes)[target_band - 1]
    offset = rng.below(prev_band_size)
    src_pos = band_start[target_band - 1] + offset
    mandatory = prev + src_pos

    extra = spec.connection_count - mandatory.size
    chosen = _sample_pairs(rng, total_pairs, np.sort(mandatory), extra)
    pair_idx = np.concatenate([mandatory, chosen])

    t = np.searchsorted(cum, pair_idx, side="right")
    sources = order[pair_idx - prev[t]]
    dests = targets[t]
    edge_order = np.lexsort((dests, sources))
    sources, dests = sources[edge_order], dests[edge_order]

    lo, hi = spec.weight_range
    weights = (lo + (hi - lo) * rng.unit(sources.size)).astype(np.float32)

    conns = tuple(
        Connection(int(a), int(b), float(w))
        for a, b, w in zip(sources.tolist(), dests.tolist(), weights.tolist())
    )
    return Network(
        nodes=frozenset(range(next_id)),
        inputs=tuple(range(n_in)),
        outputs=tuple(range(n_in, n_in + n_out)),
        connections=conns,
    )


def _sample_pairs(rng: _Stream, total: int, taken: np.ndarray, k: int) -> np.ndarray:
    """``k`` distinct pair indices from ``[0, total)`` avoiding sorted ``taken``."""
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    free = total - taken.size
    if 2 * k > free:
        # dense: partial Fisher-Yates over the explicit free list
        pool = np.setdiff1d(np.arange(total, dtype=np.int64), taken, assume_unique=True)
        picks = rng.below(np.arange(free, free - k, -1, dtype=np.int64))
        for i, j in enumerate(picks.tolist()):
            j += i
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k].copy()

    out = np.empty(0, dtype=np.int64)
    seen = taken
    while out.size < k:
        need = k - out.size
        draw = rng.below(total, need + need // 4 + 16)
        _, first = np.unique(draw, return_index=True)
        draw = draw[np.sort(first)]
        draw = draw[~np.isin(draw, seen)][:need]
        out = np.concatenate([out, draw])
        seen = np.union1d(seen, draw)
    return out


def spec_for(
    connections: int,
    depth: int,
    seed: int,
    *,
    inputs: int = 16,
    outputs: int = 8,
    hidden: int | None = None,
    edges_per_node: int = 10,
) -> GenSpec:
    """A feasible spec of the requested size, sizing the hidden pool.

    Without an explicit ``hidden`` count, roughly one hidden node per
    ``edges_per_node`` connections is used, clipped so that depth stays
    reachable and every node can still get its mandatory edge.
    """
    if hidden is None:
        hidden = 0 if depth == 2 else max(depth - 2, connections // edges_per_node)
        ceiling = max(depth - 2, connections - outputs)
        hidden = min(hidden, ceiling)
        # shallow or narrow shapes need a bigger pool to host all edges
        while depth > 2 and hidden < ceiling:
            trial = GenSpec(inputs, outputs, hidden, connections, depth, seed=seed)
            if trial.max_connections() >= connections:
                break
            hidden = min(ceiling, max(hidden + 1, hidden * 5 // 4))
    return GenSpec(inputs, outputs, hidden, connections, depth, seed=seed)
