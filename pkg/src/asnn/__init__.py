"""Layered evaluation of sparse, arbitrary-topology feed-forward networks."""

import warnings

# numba probes for TBB on first parallel launch and warns when it is too old;
# the OpenMP/workqueue layers are used instead.
warnings.filterwarnings("ignore", message="The TBB threading layer", module="numba")

from .layout import FlatNode, LayeredLayout, flatten, layer_slice_bounds  # noqa: E402
from .network import (  # noqa: E402
    Connection,
    Network,
    ValidationError,
    ValidationReport,
    compute_required,
    normalize,
    sigmoid,
    sigmoid32,
    validate,
)
from .parallel import (  # noqa: E402
    BackendUnavailable,
    DebugHooks,
    ParallelConfig,
    eval_parallel,
    max_layer_width,
)
from .segmentation import LayerAssignment, OutputUnreachable, depth, segment  # noqa: E402
from .sequential import (  # noqa: E402
    ActivationState,
    InputArityMismatch,
    eval_sequential,
    read_outputs,
)

__all__ = [
    "ActivationState",
    "BackendUnavailable",
    "Connection",
    "DebugHooks",
    "FlatNode",
    "InputArityMismatch",
    "LayerAssignment",
    "LayeredLayout",
    "Network",
    "OutputUnreachable",
    "ParallelConfig",
    "ValidationError",
    "ValidationReport",
    "compute_required",
    "depth",
    "eval_parallel",
    "eval_sequential",
    "flatten",
    "layer_slice_bounds",
    "max_layer_width",
    "normalize",
    "read_outputs",
    "segment",
    "sigmoid",
    "sigmoid32",
    "validate",
]
