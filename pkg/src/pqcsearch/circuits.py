"""Circuit IR: gate vocabulary, ansatz as an ordered gate sequence, and
hardware-efficient ansatz (HEA) templates.

An ansatz is a flat, temporally ordered sequence of gates over ``n_qubits``
wires.  Each parametrized gate carries a *binding* telling the simulator
where its angle comes from: a feature column of the input row
(``FeatureSlot``), a trainable parameter (``ParamSlot``), or nothing for
fixed gates (CNOT).  Feature-bound gates are the data-encoding layer and are
treated as immutable by the architecture search.

The HEA-k-m template repeats, m times, a feature-encoding layer of RX gates
followed by k variational layers (RY-RZ-RY rotations per qubit, then a
cyclic ring of CNOTs).  Its trainable parameter count is ``3 * n * k * m``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import ConfigurationError, ParseError

__all__ = [
    "GateKind",
    "FeatureSlot",
    "ParamSlot",
    "Gate",
    "Ansatz",
    "HeaSpec",
    "build_hea",
    "validate",
    "reindex_params",
    "ansatz_to_dict",
    "ansatz_from_dict",
    "ansatz_to_text",
    "ansatz_from_text",
    "save_ansatz",
    "load_ansatz",
]


class GateKind(str, Enum):
    """Closed gate vocabulary: single-qubit rotations, CNOT, controlled rotations."""

    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"
    CRX = "CRX"
    CRY = "CRY"
    CRZ = "CRZ"

    @property
    def arity(self) -> int:
        return 1 if self in (GateKind.RX, GateKind.RY, GateKind.RZ) else 2

    @property
    def n_params(self) -> int:
        return 0 if self is GateKind.CNOT else 1

    @property
    def axis(self) -> str:
        """Rotation axis letter ('X', 'Y', 'Z'); CNOT has none."""
        if self is GateKind.CNOT:
            raise ValueError("CNOT has no rotation axis")
        return self.value[-1]


ONE_QUBIT_KINDS = (GateKind.RX, GateKind.RY, GateKind.RZ)
TWO_QUBIT_KINDS = (GateKind.CNOT, GateKind.CRX, GateKind.CRY, GateKind.CRZ)


@dataclass(frozen=True)
class FeatureSlot:
    """Angle read from feature column ``index`` of the input row."""

    index: int


@dataclass(frozen=True)
class ParamSlot:
    """Angle read from trainable parameter ``index``."""

    index: int


@dataclass(frozen=True)
class Gate:
    """One gate in the sequence.

    ``wires`` lists the control first for two-qubit kinds.  ``binding`` is a
    FeatureSlot, a ParamSlot, or None for kinds without a parameter.
    """

    kind: GateKind
    wires: tuple[int, ...]
    binding: FeatureSlot | ParamSlot | None = None

    @property
    def is_encoding(self) -> bool:
        return isinstance(self.binding, FeatureSlot)


@dataclass(frozen=True)
class Ansatz:
    """Temporally ordered gate sequence over ``n_qubits`` wires."""

    n_qubits: int
    gates: tuple[Gate, ...]

    @property
    def n_params(self) -> int:
        return sum(1 for g in self.gates if isinstance(g.binding, ParamSlot))

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    def feature_indices(self) -> list[int]:
        return [g.binding.index for g in self.gates if isinstance(g.binding, FeatureSlot)]


@dataclass(frozen=True)
class HeaSpec:
    """Hardware-efficient ansatz shape: k variational layers inside each of
    m re-encoding blocks."""

    n_qubits: int
    k: int
    m: int


def build_hea(spec: HeaSpec) -> Ansatz:
    """Construct the HEA-k-m ansatz.

    Per re-encoding block: one RX(feature j) per qubit j, then k repetitions
    of [RY, RZ, RY with fresh parameters on each qubit, followed by the
    cyclic CNOT ring control i -> target (i+1) mod n].  The ring is skipped
    for a single qubit.
    """
    n, k, m = spec.n_qubits, spec.k, spec.m
    if n < 1:
        raise ConfigurationError(f"n_qubits must be >= 1, got {n}")
    if k < 1 or m < 1:
        raise ConfigurationError(f"k and m must be >= 1, got k={k}, m={m}")

    gates: list[Gate] = []
    p = 0
    for _ in range(m):
        for j in range(n):
            gates.append(Gate(GateKind.RX, (j,), FeatureSlot(j)))
        for _ in range(k):
            for i in range(n):
                for kind in (GateKind.RY, GateKind.RZ, GateKind.RY):
                    gates.append(Gate(kind, (i,), ParamSlot(p)))
                    p += 1
            if n >= 2:
                for i in range(n):
                    gates.append(Gate(GateKind.CNOT, (i, (i + 1) % n)))
    return Ansatz(n, tuple(gates))


def validate(a: Ansatz, n_features: int | None = None) -> list[str]:
    """Check every ansatz invariant; returns the list of violations (empty = ok).

    ``n_features`` bounds FeatureSlot indices; defaults to ``n_qubits``
    (one-to-one feature encoding).
    """
    violations: list[str] = []
    if a.n_qubits < 1:
        violations.append(f"n_qubits must be >= 1, got {a.n_qubits}")
        return violations
    d = a.n_qubits if n_features is None else n_features

    param_indices: list[int] = []
    for pos, g in enumerate(a.gates):
        if len(g.wires) != g.kind.arity:
            violations.append(f"gate {pos}: {g.kind.value} expects {g.kind.arity} wires, got {len(g.wires)}")
        if len(set(g.wires)) != len(g.wires):
            violations.append(f"gate {pos}: duplicate wires {g.wires}")
        for w in g.wires:
            if not 0 <= w < a.n_qubits:
                violations.append(f"gate {pos}: wire {w} out of range for {a.n_qubits} qubits")
        if g.kind.n_params == 0:
            if g.binding is not None:
                violations.append(f"gate {pos}: {g.kind.value} takes no parameter but has a binding")
        else:
            if g.binding is None:
                violations.append(f"gate {pos}: {g.kind.value} requires a binding")
            elif isinstance(g.binding, FeatureSlot):
                if g.kind not in ONE_QUBIT_KINDS:
                    violations.append(f"gate {pos}: feature binding only allowed on single-qubit rotations")
                elif not 0 <= g.binding.index < d:
                    violations.append(f"gate {pos}: feature index {g.binding.index} out of range for {d} features")
            elif isinstance(g.binding, ParamSlot):
                param_indices.append(g.binding.index)

    counts: dict[int, int] = {}
    for idx in param_indices:
        counts[idx] = counts.get(idx, 0) + 1
    for idx, c in sorted(counts.items()):
        if c > 1:
            violations.append(f"parameter slot {idx} used {c} times (must be unique)")
    if param_indices and sorted(set(param_indices)) != list(range(len(set(param_indices)))):
        violations.append(f"non-contiguous parameters: slots {sorted(set(param_indices))}")
    return violations


def reindex_params(a: Ansatz) -> Ansatz:
    """Renumber parameter slots to the contiguous range 0..n_params-1,
    preserving temporal order.  Feature slots are untouched."""
    mapping: dict[int, int] = {}
    gates: list[Gate] = []
    for g in a.gates:
        if isinstance(g.binding, ParamSlot):
            old = g.binding.index
            if old not in mapping:
                mapping[old] = len(mapping)
            new = mapping[old]
            gates.append(g if new == old else Gate(g.kind, g.wires, ParamSlot(new)))
        else:
            gates.append(g)
    return Ansatz(a.n_qubits, tuple(gates))


# --- serialization -----------------------------------------------------------

def _binding_to_dict(b: FeatureSlot | ParamSlot | None) -> dict:
    if b is None:
        return {"type": "none"}
    if isinstance(b, FeatureSlot):
        return {"type": "feature", "index": b.index}
    return {"type": "param", "index": b.index}


def _binding_from_dict(d: dict) -> FeatureSlot | ParamSlot | None:
    t = d.get("type")
    if t == "none":
        return None
    if t == "feature":
        return FeatureSlot(int(d["index"]))
    if t == "param":
        return ParamSlot(int(d["index"]))
    raise ParseError(f"unknown binding type {t!r}")


def ansatz_to_dict(a: Ansatz) -> dict:
    return {
        "n_qubits": a.n_qubits,
        "gates": [
            {"kind": g.kind.value, "wires": list(g.wires), "binding": _binding_to_dict(g.binding)}
            for g in a.gates
        ],
    }


def ansatz_from_dict(d: dict) -> Ansatz:
    try:
        gates = tuple(
            Gate(GateKind(g["kind"]), tuple(int(w) for w in g["wires"]), _binding_from_dict(g["binding"]))
            for g in d["gates"]
        )
        a = Ansatz(int(d["n_qubits"]), gates)
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"malformed ansatz document: {exc}") from exc
    problems = validate(a, n_features=max(a.feature_indices(), default=-1) + 1 or None)
    if problems:
        raise ParseError("invalid ansatz: " + "; ".join(problems))
    return a


def _binding_to_token(b: FeatureSlot | ParamSlot | None) -> str:
    if b is None:
        return "none"
    if isinstance(b, FeatureSlot):
        return f"feature:{b.index}"
    return f"param:{b.index}"


def ansatz_to_text(a: Ansatz) -> str:
    """Line-oriented form: header ``n_qubits n_params``, then one
    ``kind wires binding`` line per gate (wires comma-separated)."""
    lines = [f"{a.n_qubits} {a.n_params}"]
    for g in a.gates:
        wires = ",".join(str(w) for w in g.wires)
        lines.append(f"{g.kind.value} {wires} {_binding_to_token(g.binding)}")
    return "\n".join(lines) + "\n"


def ansatz_from_text(text: str) -> Ansatz:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty ansatz text")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError("header must be 'n_qubits n_params'", row=1)
    try:
        n_qubits, n_params = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"bad header: {exc}", row=1) from exc

    gates: list[Gate] = []
    for row, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError("expected 'kind wires binding'", row=row)
        kind_s, wires_s, binding_s = parts
        try:
            kind = GateKind(kind_s)
        except ValueError as exc:
            raise ParseError(f"unknown gate kind {kind_s!r}", row=row) from exc
        try:
            wires = tuple(int(w) for w in wires_s.split(","))
        except ValueError as exc:
            raise ParseError(f"bad wires {wires_s!r}", row=row) from exc
        if binding_s == "none":
            binding: FeatureSlot | ParamSlot | None = None
        elif binding_s.startswith("feature:"):
            binding = FeatureSlot(int(binding_s.split(":", 1)[1]))
        elif binding_s.startswith("param:"):
            binding = ParamSlot(int(binding_s.split(":", 1)[1]))
        else:
            raise ParseError(f"bad binding {binding_s!r}", row=row)
        gates.append(Gate(kind, wires, binding))

    a = Ansatz(n_qubits, tuple(gates))
    if a.n_params != n_params:
        raise ParseError(f"header declares {n_params} parameters, body has {a.n_params}")
    return a


def save_ansatz(a: Ansatz, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ansatz_to_dict(a), indent=2) + "\n")


def load_ansatz(path: str | Path) -> Ansatz:
    return ansatz_from_dict(json.loads(Path(path).read_text()))
