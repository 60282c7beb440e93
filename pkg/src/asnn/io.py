"""Reader and writer for the line-based ``.asnn`` network format.

::

    asnn 1
    inputs 0 1
    outputs 2
    nodes 0 1 2
    edge 0 2 0.5
    edge 1 2 -0.25

UTF-8, LF line endings; blank lines and ``#`` comments (whole-line or
trailing) are ignored. The
``nodes`` line is optional on read (defaults to every id mentioned) and is
always written so isolated nodes survive a round trip. Weights are the
shortest decimal that parses back to the same float32.

A comment of the form ``# provenance k=v ...`` carries the generator
parameters of a generated network and is parsed back by
:func:`read_network_file`.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .netgen import GenSpec
from .network import Connection, Network, ValidationError, validate

FORMAT_VERSION = 1
_PROVENANCE = "# provenance"
_EDGE_REF = re.compile(r"(\d+)->(\d+)")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.message = message
        self.line = line
        self.path = path
        where = ":".join(str(p) for p in (path, line) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class NetworkFile:
    format_version: int
    network: Network
    provenance: GenSpec | None = None


def format_weight(w: float) -> str:
    """Shortest decimal that round-trips through float32."""
    return str(np.float32(w))


def _provenance_line(spec: GenSpec) -> str:
    lo, hi = spec.weight_range
    return (
        f"{_PROVENANCE} inputs={spec.input_count} outputs={spec.output_count} "
        f"hidden={spec.hidden_count} connections={spec.connection_count} "
        f"depth={spec.target_depth} weight_lo={lo!r} weight_hi={hi!r} seed={spec.seed}"
    )


def dumps(net: Network, provenance: GenSpec | None = None) -> str:
    lines = [f"asnn {FORMAT_VERSION}"]
    if provenance is not None:
        lines.append(_provenance_line(provenance))
    lines.append(" ".join(["inputs", *map(str, net.inputs)]))
    lines.append(" ".join(["outputs", *map(str, net.outputs)]))
    lines.append(" ".join(["nodes", *map(str, sorted(net.nodes))]))
    for c in sorted(net.connections, key=lambda c: (c.source, c.target)):
        lines.append(f"edge {c.source} {c.target} {format_weight(c.weight)}")
    return "\n".join(lines) + "\n"


def write_network(net: Network, path: str | os.PathLike, provenance: GenSpec | None = None) -> None:
    """Validate ``net`` and write it; nothing is created if it is invalid."""
    validate(net).raise_if_invalid()
    text = dumps(net, provenance)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write network file: {exc.strerror}", str(path)) from exc


def _ints(tokens: list[str], lineno: int) -> list[int]:
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected integer node ids, got {' '.join(tokens)!r}", lineno) from None
    if any(v < 0 for v in values):
        raise ParseError("node ids must be non-negative", lineno)
    return values


def _parse_provenance(text: str, lineno: int) -> GenSpec:
    try:
        fields = dict(tok.split("=", 1) for tok in text.split()[2:])
        return GenSpec(
            input_count=int(fields["inputs"]),
            output_count=int(fields["outputs"]),
            hidden_count=int(fields["hidden"]),
            connection_count=int(fields["connections"]),
            target_depth=int(fields["depth"]),
            weight_range=(float(fields["weight_lo"]), float(fields["weight_hi"])),
            seed=int(fields["seed"]),
        )
    except (KeyError, ValueError):
        raise ParseError("malformed provenance comment", lineno) from None


def loads(text: str) -> NetworkFile:
    """Parse ``.asnn`` text and validate the result."""
    version = None
    inputs = outputs = nodes = None
    provenance = None
    conns: list[Connection] = []
    edge_line: dict[tuple[int, int], int] = {}

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if line.startswith(_PROVENANCE):
            provenance = _parse_provenance(line, lineno)
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        key = tokens[0]
        if version is None:
            if key != "asnn" or len(tokens) != 2:
                raise ParseError("missing 'asnn <version>' header", lineno)
            if tokens[1] != str(FORMAT_VERSION):
                raise ParseError(f"unsupported version {tokens[1]!r}", lineno)
            version = FORMAT_VERSION
        elif key in ("inputs", "outputs", "nodes"):
            ids = _ints(tokens[1:], lineno)
            if key == "inputs" and inputs is None:
                inputs = ids
            elif key == "outputs" and outputs is None:
                outputs = ids
            elif key == "nodes" and nodes is None:
                nodes = ids
            else:
                raise ParseError(f"repeated {key!r} line", lineno)
        elif key == "edge":
            if inputs is None or outputs is None:
                raise ParseError("edge before inputs/outputs lines", lineno)
            if len(tokens) != 4:
                raise ParseError("edge needs: edge <source> <target> <weight>", lineno)
            a, b = _ints(tokens[1:3], lineno)
            try:
                w = np.float32(tokens[3])
            except ValueError:
                raise ParseError(f"bad weight {tokens[3]!r}", lineno) from None
            if not np.isfinite(w):
                raise ParseError(f"non-finite weight {tokens[3]!r}", lineno)
            if a == b:
                raise ParseError(f"self-loop at line {lineno}", lineno)
            if (a, b) in edge_line:
                raise ParseError(
                    f"duplicate edge {a} {b} (first at line {edge_line[a, b]})", lineno
                )
            edge_line[a, b] = lineno
            conns.append(Connection(a, b, float(w)))
        else:
            raise ParseError(f"unknown record {key!r}", lineno)

    if version is None:
        raise ParseError("empty file: missing 'asnn <version>' header")
    if inputs is None or outputs is None:
        raise ParseError("missing inputs or outputs line")

    if nodes is None:
        ids = set(inputs) | set(outputs)
        for c in conns:
            ids.update((c.source, c.target))
    else:
        ids = set(nodes)
    net = Network(frozenset(ids), tuple(inputs), tuple(outputs), tuple(conns))
    report = validate(net)
    if not report.ok:
        raise ValidationError(_locate(v, edge_line) for v in report.violations)
    return NetworkFile(version, net, provenance)


def _locate(violation: str, edge_line: dict[tuple[int, int], int]) -> str:
    m = _EDGE_REF.search(violation)
    if m:
        lineno = edge_line.get((int(m.group(1)), int(m.group(2))))
        if lineno is not None:
            return f"line {lineno}: {violation}"
    return violation


def read_network_file(path: str | os.PathLike) -> NetworkFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read network file: {exc.strerror}", str(path)) from exc
    try:
        return loads(text)
    except ParseError as exc:
        raise ParseError(exc.message, exc.line, str(path)) from None


def read_network(path: str | os.PathLike) -> Network:
    return read_network_file(path).network
