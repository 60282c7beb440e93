import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from asnn import Network  # noqa: E402
from asnn.netgen import generate, spec_for  # noqa: E402

W1, W2 = 0.5, -0.25


@pytest.fixture
def two_in_one_out():
    return Network.build([0, 1], [2], [(0, 2, W1), (1, 2, W2)])


@pytest.fixture
def skip_net():
    return Network.build(
        [0], [3], [(0, 1, 1.0), (0, 2, 0.5), (1, 2, -1.0), (2, 3, 2.0), (0, 3, 0.25)]
    )


@pytest.fixture
def pruned_net():
    # node 3 hangs off the input but never reaches the output
    return Network.build([0], [2], [(0, 2, 0.75), (0, 3, -0.5)])


def random_generated(count, seed, min_conn=20, max_conn=2000, max_depth=12):
    """Seeded stream of generated networks of mixed size and depth."""
    rnd = random.Random(seed)
    for _ in range(count):
        conns = rnd.randint(min_conn, max_conn)
        depth = rnd.randint(3, max_depth)
        spec = spec_for(
            conns,
            depth,
            rnd.getrandbits(64),
            inputs=rnd.randint(1, 6),
            outputs=rnd.randint(1, 4),
        )
        yield generate(spec)


@st.composite
def random_dags(draw, max_nodes=30):
    """Arbitrary valid networks, including pruned hidden nodes, hidden nodes
    without any predecessor, and outputs that may be unreachable."""
    n = draw(st.integers(3, max_nodes))
    order = draw(st.permutations(range(n)))
    n_in = draw(st.integers(1, max(1, n // 3)))
    inputs = list(order[:n_in])
    rest = list(order[n_in:])
    n_out = draw(st.integers(1, max(1, len(rest) // 2)))
    outputs = draw(st.permutations(rest))[:n_out]
    rank = {v: k for k, v in enumerate(order)}
    pairs = [(a, b) for a in range(n) for b in range(n) if rank[a] < rank[b] and b not in inputs]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=4 * n)) if pairs else []
    weights = draw(
        st.lists(
            st.floats(-2, 2, allow_nan=False, width=32), min_size=len(chosen), max_size=len(chosen)
        )
    )
    return Network.build(inputs, outputs, [(a, b, w) for (a, b), w in zip(chosen, weights)], range(n))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
