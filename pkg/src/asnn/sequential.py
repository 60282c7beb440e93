"""Sequential reference evaluator.

Nodes are activated one at a time in layout order (ascending layer, then
id). This is the correctness oracle for the parallel backend and the
baseline the benchmark compares against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .layout import LayeredLayout
from .network import Network


class InputArityMismatch(ValueError):
    pass


@dataclass
class ActivationState:
    """Values produced by one evaluation.

    ``inputs`` and ``outputs`` are indexed by dense layout id; ``node_ids``
    maps a dense id back to the id used in the source network.
    """

    inputs: np.ndarray
    outputs: np.ndarray
    node_ids: np.ndarray
    write_counts: np.ndarray | None = None

    def value(self, node: int) -> np.float32:
        """Activation of ``node`` given by its source-network id."""
        k = int(np.searchsorted(self.node_ids, node))
        if k >= self.node_ids.size or self.node_ids[k] != node:
            raise KeyError(f"node {node} was not evaluated")
        return self.outputs[k]


def prepare_state(layout: LayeredLayout, input_values: Sequence[float]) -> ActivationState:
    """Scatter ``input_values`` (declared input order) into a fresh state."""
    values = np.asarray(input_values, dtype=np.float32).reshape(-1)
    if values.size != layout.input_ids.size:
        raise InputArityMismatch(
            f"expected {layout.input_ids.size} input value(s), got {values.size}"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("input values must be finite")
    inputs = np.zeros(layout.node_count, dtype=np.float32)
    inputs[layout.input_ids] = values
    return ActivationState(
        inputs=inputs,
        outputs=np.zeros(layout.node_count, dtype=np.float32),
        node_ids=layout.original_ids,
    )


def eval_sequential(layout: LayeredLayout, input_values: Sequence[float]) -> ActivationState:
    state = prepare_state(layout, input_values)
    _kernels.eval_sequential_kernel(
        layout.nodes_per_layer[0],
        layout.ids,
        layout.in_ptr,
        layout.in_nodes,
        layout.in_weights,
        state.inputs,
        state.outputs,
    )
    return state


def read_outputs(state: ActivationState, net: Network) -> list[np.float32]:
    """Output activations in the network's declared output order."""
    return [state.value(o) for o in net.outputs]
