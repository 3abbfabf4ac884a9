"""Local architecture search over gate-level circuit modifications.

Starting from a base ansatz, each iteration samples a population of
candidate circuits by walking the parent's gate sequence and, per eligible
gate, drawing Bernoulli trials for the four modification actions in the
fixed order add, remove, switch, move.  The first success is applied and the
remaining actions are skipped for that gate, so the per-gate action
probabilities are p_add, (1-p_add)*p_remove, and so on down the chain
(``expected_action_count`` returns exactly these).  Feature-encoding gates
are never modified: changing them would change the learning problem rather
than the circuit.

Action semantics:

* add    - insert after the gate a uniformly chosen kind of the same arity,
           on the same wires; parametrized insertions get a fresh slot;
* remove - delete the gate;
* switch - replace the kind with a uniformly chosen *different* kind of the
           same arity, keeping/creating/dropping the parameter slot as the
           new kind requires;
* move   - reassign the wires uniformly among valid assignments other than
           the current one (a no-op when no alternative exists).

Every candidate is trained from scratch (parameters re-initialized to zero)
and ranked by validation MSE; the top ``top_k`` seed the next iteration.
Candidate seeds are derived deterministically from (master seed, iteration,
parent index, child index), so runs are reproducible for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .circuits import (
    Ansatz,
    Gate,
    GateKind,
    ONE_QUBIT_KINDS,
    ParamSlot,
    TWO_QUBIT_KINDS,
    reindex_params,
    validate,
)
from .errors import ConfigurationError
from .training import Metrics, TrainConfig, TrainResult, train

__all__ = [
    "ModificationProbs",
    "SearchConfig",
    "ModAction",
    "Candidate",
    "IterationReport",
    "derive_seed",
    "sample_modifications",
    "apply_modifications",
    "sample_modified",
    "expected_action_count",
    "run_search",
    "report_to_dict",
    "report_csv_rows",
    "CSV_HEADER",
]

ACTIONS = ("add", "remove", "switch", "move")


@dataclass(frozen=True)
class ModificationProbs:
    add: float = 0.1
    remove: float = 0.1
    switch: float = 0.1
    move: float = 0.1

    def __post_init__(self):
        for name in ACTIONS:
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"p_{name} must be in [0, 1], got {p}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.add, self.remove, self.switch, self.move)


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 3
    samples_total: int = 100
    top_k: int = 10
    probs: ModificationProbs = field(default_factory=ModificationProbs)
    master_seed: int = 0
    elitism: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.top_k < 1:
            raise ConfigurationError(f"top_k must be >= 1, got {self.top_k}")
        if self.samples_total < self.top_k:
            raise ConfigurationError(
                f"samples_total ({self.samples_total}) must be >= top_k ({self.top_k})"
            )


@dataclass(frozen=True)
class ModAction:
    """One applied modification, anchored at a gate position of the parent."""

    action: str
    position: int
    kind: str | None = None  # new gate kind for add/switch
    wires: tuple[int, ...] | None = None  # new wires for add/move

    def to_dict(self) -> dict:
        d: dict = {"action": self.action, "position": self.position}
        if self.kind is not None:
            d["kind"] = self.kind
        if self.wires is not None:
            d["wires"] = list(self.wires)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModAction":
        return cls(
            action=d["action"],
            position=int(d["position"]),
            kind=d.get("kind"),
            wires=tuple(d["wires"]) if "wires" in d else None,
        )


def derive_seed(*parts: int) -> int:
    """Stable integer hash of a tuple of ints (process-independent)."""
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


def _same_arity_kinds(kind: GateKind) -> tuple[GateKind, ...]:
    return ONE_QUBIT_KINDS if kind.arity == 1 else TWO_QUBIT_KINDS


def _move_options(gate: Gate, n_qubits: int) -> list[tuple[int, ...]]:
    if gate.kind.arity == 1:
        return [(q,) for q in range(n_qubits) if (q,) != gate.wires]
    return [
        (c, t)
        for c in range(n_qubits)
        for t in range(n_qubits)
        if c != t and (c, t) != gate.wires
    ]


def sample_modifications(a: Ansatz, probs: ModificationProbs, rng_seed: int) -> list[ModAction]:
    """Draw the modification log for one candidate.

    Walks the parent's gates in temporal order; encoding gates are skipped.
    Per gate, Bernoulli trials run in the order add, remove, switch, move and
    stop at the first success.
    """
    rng = np.random.default_rng(rng_seed)
    p = probs.as_tuple()
    log: list[ModAction] = []
    for pos, gate in enumerate(a.gates):
        if gate.is_encoding:
            continue
        for action, prob in zip(ACTIONS, p):
            if prob <= 0.0 or rng.random() >= prob:
                continue
            if action == "add":
                kinds = _same_arity_kinds(gate.kind)
                kind = kinds[rng.integers(len(kinds))]
                log.append(ModAction("add", pos, kind=kind.value, wires=gate.wires))
            elif action == "remove":
                log.append(ModAction("remove", pos))
            elif action == "switch":
                kinds = [k for k in _same_arity_kinds(gate.kind) if k is not gate.kind]
                kind = kinds[rng.integers(len(kinds))]
                log.append(ModAction("switch", pos, kind=kind.value))
            else:  # move
                options = _move_options(gate, a.n_qubits)
                if options:  # no alternative wires -> the action resolves to a no-op
                    wires = options[rng.integers(len(options))]
                    log.append(ModAction("move", pos, wires=wires))
            break
    return log


def apply_modifications(a: Ansatz, log: list[ModAction]) -> Ansatz:
    """Replay a modification log against the parent; deterministic."""
    by_pos = {m.position: m for m in log}
    next_slot = a.n_params  # fresh slots are appended, then renumbered
    gates: list[Gate] = []
    for pos, gate in enumerate(a.gates):
        m = by_pos.get(pos)
        if m is None:
            gates.append(gate)
            continue
        if m.action == "remove":
            continue
        if m.action == "add":
            gates.append(gate)
            kind = GateKind(m.kind)
            binding = None
            if kind.n_params:
                binding = ParamSlot(next_slot)
                next_slot += 1
            gates.append(Gate(kind, tuple(m.wires), binding))
        elif m.action == "switch":
            kind = GateKind(m.kind)
            if kind.n_params == 0:
                binding = None
            elif isinstance(gate.binding, ParamSlot):
                binding = gate.binding
            else:
                binding = ParamSlot(next_slot)
                next_slot += 1
            gates.append(Gate(kind, gate.wires, binding))
        elif m.action == "move":
            gates.append(Gate(gate.kind, tuple(m.wires), gate.binding))
        else:
            raise ValueError(f"unknown action {m.action!r}")
    return reindex_params(Ansatz(a.n_qubits, tuple(gates)))


def sample_modified(a: Ansatz, probs: ModificationProbs, rng_seed: int) -> tuple[Ansatz, list[ModAction]]:
    """Sample one modified child of ``a``; returns the child and its log."""
    log = sample_modifications(a, probs, rng_seed)
    child = apply_modifications(a, log)
    problems = validate(child, n_features=max(child.feature_indices(), default=-1) + 1 or None)
    if problems:
        raise AssertionError("sampled ansatz violates invariants: " + "; ".join(problems))
    return child, log


def expected_action_count(a: Ansatz, probs: ModificationProbs) -> dict[str, float]:
    """Analytic expected number of applications per action for one sample,
    under the first-success-stops order add, remove, switch, move."""
    eligible = sum(1 for g in a.gates if not g.is_encoding)
    p1, p2, p3, p4 = probs.as_tuple()
    per_gate = {
        "add": p1,
        "remove": (1 - p1) * p2,
        "switch": (1 - p1) * (1 - p2) * p3,
        "move": (1 - p1) * (1 - p2) * (1 - p3) * p4,
    }
    return {name: eligible * p for name, p in per_gate.items()}


# --- search loop ---------------------------------------------------------------


@dataclass
class Candidate:
    id: str
    parent_id: str
    seed: int
    ansatz: Ansatz
    log: list[ModAction]
    result: TrainResult | None = None
    error: str | None = None

    @property
    def val_mse(self) -> float:
        if self.result is None:
            return math.inf
        v = self.result.val.mse
        return v if math.isfinite(v) else math.inf


@dataclass
class IterationReport:
    iteration: int
    candidates: list[Candidate]
    ranking: list[int]  # candidate list indices, best first
    top_ids: list[str]
    best_val_mse: float
    best_val_r2: float


def _train_one(args) -> tuple[TrainResult | None, str | None]:
    ansatz, train_set, val_set, cfg = args
    try:
        result = train(ansatz, train_set, val_set, cfg)
    except Exception as exc:  # a failed candidate must not abort the run
        return None, f"{type(exc).__name__}: {exc}"
    return result, None


def _shuffle_seed_for(candidate_seed: int) -> int:
    return derive_seed(candidate_seed, 1)


def _rank(candidates: list[Candidate]) -> list[int]:
    return sorted(range(len(candidates)), key=lambda i: (candidates[i].val_mse, i))


def run_search(
    base: Ansatz,
    train_set,
    val_set,
    cfg: SearchConfig,
    jobs: int = 1,
) -> tuple[list[IterationReport], list[Ansatz]]:
    """Run the full search loop.

    Iteration 0 trains the base ansatz and records it as the baseline; each
    later iteration samples ``samples_total`` children from the current
    parents (split evenly, extras truncated), trains every child from zero
    initialization, and keeps the ``top_k`` by validation MSE.  With
    ``elitism`` the parents compete in the ranking alongside their children.

    Returns the per-iteration reports (including iteration 0) and the final
    top-k ansaetze in rank order.  The output is a pure function of the
    inputs; ``jobs`` only sets the worker-process count.
    """
    train_set = tuple(np.asarray(v, dtype=np.float64) for v in train_set)
    val_set = tuple(np.asarray(v, dtype=np.float64) for v in val_set)

    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        base_seed = derive_seed(cfg.master_seed, 0, 0, 0)
        base_cand = Candidate(id="base", parent_id="", seed=base_seed, ansatz=base, log=[])
        tcfg = replace(cfg.train, shuffle_seed=_shuffle_seed_for(base_seed))
        base_cand.result, base_cand.error = _train_one((base, train_set, val_set, tcfg))
        reports = [
            IterationReport(
                iteration=0,
                candidates=[base_cand],
                ranking=[0],
                top_ids=["base"],
                best_val_mse=base_cand.val_mse,
                best_val_r2=base_cand.result.val.r2 if base_cand.result else math.nan,
            )
        ]
        parents = [base_cand]

        for it in range(1, cfg.iterations + 1):
            per_parent = -(-cfg.samples_total // len(parents))  # ceil
            candidates: list[Candidate] = []
            for p_idx, parent in enumerate(parents):
                for c_idx in range(per_parent):
                    if len(candidates) >= cfg.samples_total:
                        break
                    seed = derive_seed(cfg.master_seed, it, p_idx, c_idx)
                    child, log = sample_modified(parent.ansatz, cfg.probs, seed)
                    candidates.append(
                        Candidate(
                            id=f"i{it}c{len(candidates)}",
                            parent_id=parent.id,
                            seed=seed,
                            ansatz=child,
                            log=log,
                        )
                    )

            tasks = [
                (c.ansatz, train_set, val_set, replace(cfg.train, shuffle_seed=_shuffle_seed_for(c.seed)))
                for c in candidates
            ]
            if executor is None:
                outcomes = [_train_one(t) for t in tasks]
            else:
                outcomes = list(executor.map(_train_one, tasks, chunksize=4))
            for cand, (result, error) in zip(candidates, outcomes):
                cand.result, cand.error = result, error

            pool = list(candidates)
            if cfg.elitism:
                pool.extend(parents)
            ranking = _rank(pool)
            top = [pool[i] for i in ranking[: cfg.top_k]]
            best = pool[ranking[0]]
            reports.append(
                IterationReport(
                    iteration=it,
                    candidates=pool,
                    ranking=ranking,
                    top_ids=[c.id for c in top],
                    best_val_mse=best.val_mse,
                    best_val_r2=best.result.val.r2 if best.result else math.nan,
                )
            )
            parents = top
    finally:
        if executor is not None:
            executor.shutdown()

    return reports, [c.ansatz for c in parents]


# --- report serialization -------------------------------------------------------

CSV_HEADER = "iteration,candidate,parent,train_mse,train_r2,val_mse,val_r2,n_gates,n_params,rank"


def _metrics_out(m: Metrics | None, mse_factor: float) -> tuple[float, float]:
    if m is None:
        return math.inf, math.nan
    return m.mse * mse_factor, m.r2


def _candidate_dict(c: Candidate, rank: int, mse_factor: float) -> dict:
    train_mse, train_r2 = _metrics_out(c.result.train if c.result else None, mse_factor)
    val_mse, val_r2 = _metrics_out(c.result.val if c.result else None, mse_factor)
    d = {
        "id": c.id,
        "parent": c.parent_id,
        "seed": c.seed,
        "n_gates": c.ansatz.n_gates,
        "n_params": c.ansatz.n_params,
        "modifications": [m.to_dict() for m in c.log],
        "train_mse": train_mse,
        "train_r2": train_r2,
        "val_mse": val_mse,
        "val_r2": val_r2,
        "rank": rank,
    }
    if c.error is not None:
        d["error"] = c.error
    return d


def report_to_dict(reports: list[IterationReport], mse_factor: float = 1.0) -> dict:
    """JSON-ready report document.  ``mse_factor`` converts MSE values to
    original target units (see ``ScaleRecord.mse_factor``); R2 is unaffected."""
    out_iters = []
    for rep in reports:
        ranks = {idx: r + 1 for r, idx in enumerate(rep.ranking)}
        out_iters.append(
            {
                "iteration": rep.iteration,
                "candidates": [
                    _candidate_dict(c, ranks[i], mse_factor) for i, c in enumerate(rep.candidates)
                ],
                "top": rep.top_ids,
                "best_val_mse": rep.best_val_mse * mse_factor,
                "best_val_r2": rep.best_val_r2,
            }
        )
    return {"iterations": out_iters}


def report_csv_rows(reports: list[IterationReport], mse_factor: float = 1.0) -> list[str]:
    """Flat CSV rows (without header) matching CSV_HEADER."""
    rows = []
    for rep in reports:
        ranks = {idx: r + 1 for r, idx in enumerate(rep.ranking)}
        for i, c in enumerate(rep.candidates):
            train_mse, train_r2 = _metrics_out(c.result.train if c.result else None, mse_factor)
            val_mse, val_r2 = _metrics_out(c.result.val if c.result else None, mse_factor)
            rows.append(
                f"{rep.iteration},{c.id},{c.parent_id},{train_mse!r},{train_r2!r},"
                f"{val_mse!r},{val_r2!r},{c.ansatz.n_gates},{c.ansatz.n_params},{ranks[i]}"
            )
    return rows


def best_candidate(rep: IterationReport) -> Candidate:
    return rep.candidates[rep.ranking[0]]
