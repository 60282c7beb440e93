"""Flat, layer-sorted execution layout.

Nodes that survived segmentation are relabelled to dense ids ``0..N-1``
(ascending original id) so the activation array can be indexed by id
directly. Node records are stored in ascending layer order, ties by id, and
their incoming edges are kept in CSR form: ``in_ptr[p]:in_ptr[p+1]`` slices
``in_nodes``/``in_weights`` for the node at position ``p``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .network import Network, NetworkError
from .segmentation import LayerAssignment, OutputUnreachable

log = logging.getLogger(__name__)


class LayerOutOfRange(IndexError):
    pass


@dataclass(frozen=True)
class FlatNode:
    id: int
    layer: int
    numInNodes: int
    isSensor: bool
    inNodes: tuple[int, ...]
    inWeights: tuple[np.float32, ...]


@dataclass(frozen=True, eq=False)
class LayeredLayout:
    nodes_per_layer: np.ndarray  # int64, one entry per layer
    ids: np.ndarray  # int64 dense id at each position
    layer: np.ndarray  # int64 layer at each position
    in_ptr: np.ndarray  # int64, length node_count + 1
    in_nodes: np.ndarray  # int64 dense predecessor ids
    in_weights: np.ndarray  # float32, parallel to in_nodes
    original_ids: np.ndarray  # dense id -> id in the source network
    input_ids: np.ndarray  # dense ids of the sensors, declared input order
    output_ids: np.ndarray  # dense ids of the outputs, declared output order
    dropped_edges: int = 0

    @property
    def total_layers(self) -> int:
        return int(self.nodes_per_layer.size)

    @property
    def node_count(self) -> int:
        return int(self.ids.size)

    @property
    def edge_count(self) -> int:
        return int(self.in_nodes.size)

    @cached_property
    def nodes(self) -> tuple[FlatNode, ...]:
        out = []
        for p in range(self.node_count):
            lo, hi = self.in_ptr[p], self.in_ptr[p + 1]
            out.append(
                FlatNode(
                    id=int(self.ids[p]),
                    layer=int(self.layer[p]),
                    numInNodes=int(hi - lo),
                    isSensor=bool(self.layer[p] == 0),
                    inNodes=tuple(int(i) for i in self.in_nodes[lo:hi]),
                    inWeights=tuple(self.in_weights[lo:hi]),
                )
            )
        return tuple(out)

    def dense_id(self, original: int) -> int:
        k = int(np.searchsorted(self.original_ids, original))
        if k >= self.original_ids.size or self.original_ids[k] != original:
            raise KeyError(original)
        return k

    def edges(self) -> list[tuple[int, int, np.float32]]:
        """Edge list ``(source, target, weight)`` in original ids."""
        orig = self.original_ids
        out = []
        for p in range(self.node_count):
            target = int(orig[self.ids[p]])
            for k in range(self.in_ptr[p], self.in_ptr[p + 1]):
                out.append((int(orig[self.in_nodes[k]]), target, self.in_weights[k]))
        return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def flatten(net: Network, assignment: LayerAssignment) -> LayeredLayout:
    """Build the execution layout for a segmented network.

    Edges touching an unassigned node are dropped; their number is kept in
    ``dropped_edges``.
    """
    missing = assignment.unassigned.intersection(net.outputs)
    if missing:
        raise OutputUnreachable(missing)

    assigned = assignment.assigned
    dense = {old: new for new, old in enumerate(sorted(assigned))}
    preds = net.predecessors()

    n = len(dense)
    ids = np.empty(n, dtype=np.int64)
    layer = np.empty(n, dtype=np.int64)
    in_ptr = np.zeros(n + 1, dtype=np.int64)
    src: list[int] = []
    wts: list[float] = []
    p = 0
    for k, members in enumerate(assignment.layers):
        for node in members:
            ids[p] = dense[node]
            layer[p] = k
            if k > 0:
                for s, w in preds.get(node, ()):
                    if s not in dense:
                        raise NetworkError(
                            f"node {node} is assigned but its predecessor {s} is not"
                        )
                    src.append(dense[s])
                    wts.append(w)
            p += 1
            in_ptr[p] = len(src)

    dropped = len(net.connections) - len(src)
    if dropped:
        log.debug("flatten dropped %d edge(s) touching unassigned nodes", dropped)

    return LayeredLayout(
        nodes_per_layer=_frozen(np.array([len(m) for m in assignment.layers], dtype=np.int64)),
        ids=_frozen(ids),
        layer=_frozen(layer),
        in_ptr=_frozen(in_ptr),
        in_nodes=_frozen(np.array(src, dtype=np.int64)),
        in_weights=_frozen(np.array(wts, dtype=np.float32)),
        original_ids=_frozen(np.array(sorted(assigned), dtype=np.int64)),
        input_ids=_frozen(np.array([dense[i] for i in net.inputs], dtype=np.int64)),
        output_ids=_frozen(np.array([dense[o] for o in net.outputs], dtype=np.int64)),
        dropped_edges=dropped,
    )


def layer_slice_bounds(layout: LayeredLayout, layer: int) -> tuple[int, int]:
    """``(start, count)`` of ``layer`` within the position-ordered arrays."""
    if not 0 <= layer < layout.total_layers:
        raise LayerOutOfRange(f"layer {layer} outside 0..{layout.total_layers - 1}")
    start = int(layout.nodes_per_layer[:layer].sum())
    return start, int(layout.nodes_per_layer[layer])
