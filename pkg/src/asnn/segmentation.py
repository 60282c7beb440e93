"""Dependency-layer segmentation of a feed-forward network.

Layer 0 is the input set. Each following layer holds the required nodes
whose every predecessor already sits in an earlier layer, so all nodes of
one layer can be activated together once the previous layers are done.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .network import Network, NetworkError, compute_required


class OutputUnreachable(NetworkError):
    def __init__(self, outputs: Iterable[int]):
        self.outputs = sorted(outputs)
        super().__init__(f"output node(s) never assigned a layer: {self.outputs}")


@dataclass(frozen=True)
class LayerAssignment:
    layers: tuple[tuple[int, ...], ...]
    assigned: frozenset[int]
    unassigned: frozenset[int]

    def layer_of(self) -> dict[int, int]:
        return {n: k for k, members in enumerate(self.layers) for n in members}

    @property
    def widths(self) -> list[int]:
        return [len(m) for m in self.layers]


def segment(
    net: Network, required: Iterable[int] | None = None, *, strict: bool = True
) -> LayerAssignment:
    """Assign layers round by round until no further node can be promoted.

    A round promotes every required node that has a predecessor in the
    assigned set and all of its predecessors assigned. Nodes that never
    qualify are returned in ``unassigned``; an output among them raises
    :class:`OutputUnreachable` unless ``strict`` is false.

    ``required`` defaults to :func:`compute_required`. Instead of rescanning
    all connections each round, a per-node count of unassigned predecessors
    is kept; a node enters the next round exactly when its count drops to 0,
    which yields the same rounds as the full scan.
    """
    required = compute_required(net) if required is None else frozenset(required)
    preds = net.predecessors()
    succ = net.successors()
    waiting = {n: len(p) for n, p in preds.items()}

    frontier = sorted(set(net.inputs))
    layers = [tuple(frontier)]
    assigned = set(frontier)
    while True:
        ready = set()
        for a in frontier:
            for b in succ.get(a, ()):
                waiting[b] -= 1
                if waiting[b] == 0 and b in required and b not in assigned:
                    ready.add(b)
        if not ready:
            break
        frontier = sorted(ready)
        layers.append(tuple(frontier))
        assigned.update(frontier)

    unassigned = frozenset(net.nodes - assigned)
    missing = unassigned.intersection(net.outputs)
    if missing and strict:
        raise OutputUnreachable(missing)
    return LayerAssignment(tuple(layers), frozenset(assigned), unassigned)


def depth(assignment: LayerAssignment) -> int:
    """Number of layers, counting the input layer."""
    return len(assignment.layers)
