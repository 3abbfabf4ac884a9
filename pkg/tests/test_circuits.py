import pytest

from pqcsearch.circuits import (
    Ansatz,
    FeatureSlot,
    Gate,
    GateKind,
    HeaSpec,
    ParamSlot,
    ansatz_from_dict,
    ansatz_from_text,
    ansatz_to_dict,
    ansatz_to_text,
    build_hea,
    load_ansatz,
    reindex_params,
    save_ansatz,
    validate,
)
from pqcsearch.errors import ConfigurationError, ParseError


def test_gate_kind_arity_and_params():
    assert all(k.arity == 1 for k in (GateKind.RX, GateKind.RY, GateKind.RZ))
    assert all(k.arity == 2 for k in (GateKind.CNOT, GateKind.CRX, GateKind.CRY, GateKind.CRZ))
    assert GateKind.CNOT.n_params == 0
    assert all(k.n_params == 1 for k in GateKind if k is not GateKind.CNOT)


def test_hea_4_1_1_shape():
    a = build_hea(HeaSpec(4, 1, 1))
    assert a.n_gates == 20
    kinds = [g.kind for g in a.gates]
    assert kinds[:4] == [GateKind.RX] * 4
    assert sum(1 for g in a.gates if g.is_encoding) == 4
    assert sum(1 for g in a.gates if g.kind is GateKind.CNOT) == 4
    assert sum(1 for g in a.gates if isinstance(g.binding, ParamSlot)) == 12
    assert a.n_params == 12
    assert validate(a) == []


def test_hea_rotation_order_is_qubit_major():
    a = build_hea(HeaSpec(2, 1, 1))
    rot = [g for g in a.gates if isinstance(g.binding, ParamSlot)]
    assert [(g.kind, g.wires[0], g.binding.index) for g in rot] == [
        (GateKind.RY, 0, 0),
        (GateKind.RZ, 0, 1),
        (GateKind.RY, 0, 2),
        (GateKind.RY, 1, 3),
        (GateKind.RZ, 1, 4),
        (GateKind.RY, 1, 5),
    ]


def test_hea_2_qubit_cnot_ring():
    a = build_hea(HeaSpec(2, 1, 1))
    cnots = [g.wires for g in a.gates if g.kind is GateKind.CNOT]
    assert cnots == [(0, 1), (1, 0)]


def test_hea_param_count_formula():
    # derived by counting emitted parameter slots
    a = build_hea(HeaSpec(4, 2, 3))
    slots = {g.binding.index for g in a.gates if isinstance(g.binding, ParamSlot)}
    assert len(slots) == 72
    assert a.n_params == 72


@pytest.mark.parametrize("n,k,m", [(1, 1, 1), (2, 1, 2), (3, 2, 1), (4, 3, 3), (5, 2, 2)])
def test_hea_structure_invariants(n, k, m):
    a = build_hea(HeaSpec(n, k, m))
    assert a.n_params == 3 * n * k * m
    enc = [g for g in a.gates if g.is_encoding]
    assert len(enc) == n * m
    for j in range(n):
        on_j = [g for g in enc if g.binding.index == j]
        assert len(on_j) == m
        assert all(g.wires == (j,) for g in on_j)
    n_cnot = sum(1 for g in a.gates if g.kind is GateKind.CNOT)
    assert n_cnot == (n * k * m if n >= 2 else 0)
    assert validate(a) == []


def test_hea_single_qubit_has_no_entanglement():
    a = build_hea(HeaSpec(1, 2, 2))
    assert all(g.kind.arity == 1 for g in a.gates)


def test_build_hea_rejects_bad_spec():
    with pytest.raises(ConfigurationError):
        build_hea(HeaSpec(0, 1, 1))
    with pytest.raises(ConfigurationError):
        build_hea(HeaSpec(2, 0, 1))
    with pytest.raises(ConfigurationError):
        build_hea(HeaSpec(2, 1, 0))


def test_validate_reports_param_gap():
    a = Ansatz(1, (Gate(GateKind.RY, (0,), ParamSlot(0)), Gate(GateKind.RZ, (0,), ParamSlot(2))))
    assert any("non-contiguous" in v for v in validate(a))


def test_validate_reports_duplicate_wires():
    a = Ansatz(2, (Gate(GateKind.CNOT, (1, 1)),))
    assert any("duplicate wires" in v for v in validate(a))


def test_validate_reports_out_of_range_wire_and_bad_binding():
    a = Ansatz(2, (Gate(GateKind.RX, (5,), ParamSlot(0)),))
    assert any("out of range" in v for v in validate(a))
    b = Ansatz(2, (Gate(GateKind.CNOT, (0, 1), ParamSlot(0)),))
    assert any("takes no parameter" in v for v in validate(b))
    c = Ansatz(2, (Gate(GateKind.CRX, (0, 1), FeatureSlot(0)),))
    assert any("feature binding" in v for v in validate(c))
    d = Ansatz(2, (Gate(GateKind.RX, (0,), ParamSlot(0)), Gate(GateKind.RY, (1,), ParamSlot(0))))
    assert any("used 2 times" in v for v in validate(d))


def test_reindex_renumbers_in_temporal_order():
    a = Ansatz(
        1,
        (
            Gate(GateKind.RY, (0,), ParamSlot(0)),
            Gate(GateKind.RZ, (0,), ParamSlot(3)),
            Gate(GateKind.RX, (0,), ParamSlot(7)),
        ),
    )
    b = reindex_params(a)
    assert [g.binding.index for g in b.gates] == [0, 1, 2]
    assert [g.kind for g in b.gates] == [g.kind for g in a.gates]


def test_reindex_is_identity_when_contiguous_and_idempotent():
    a = build_hea(HeaSpec(3, 2, 1))
    assert reindex_params(a) == a
    shuffled = Ansatz(
        2,
        (
            Gate(GateKind.CRZ, (0, 1), ParamSlot(5)),
            Gate(GateKind.RY, (1,), ParamSlot(2)),
        ),
    )
    once = reindex_params(shuffled)
    assert reindex_params(once) == once
    assert once.n_params == 2


def test_reindex_handles_no_params():
    a = Ansatz(2, (Gate(GateKind.CNOT, (0, 1)),))
    assert reindex_params(a) == a
    assert a.n_params == 0


def test_json_round_trip_and_field_names():
    a = build_hea(HeaSpec(3, 1, 2))
    d = ansatz_to_dict(a)
    assert set(d) == {"n_qubits", "gates"}
    g0 = d["gates"][0]
    assert set(g0) == {"kind", "wires", "binding"}
    assert g0["binding"] == {"type": "feature", "index": 0}
    cnot = next(g for g in d["gates"] if g["kind"] == "CNOT")
    assert cnot["binding"] == {"type": "none"}
    param = next(g for g in d["gates"] if g["binding"]["type"] == "param")
    assert param["binding"]["index"] == 0
    assert ansatz_from_dict(d) == a


def test_text_round_trip():
    a = build_hea(HeaSpec(4, 2, 1))
    text = ansatz_to_text(a)
    assert text.splitlines()[0] == "4 24"
    assert ansatz_from_text(text) == a


def test_text_format_lines():
    a = Ansatz(
        2,
        (
            Gate(GateKind.RX, (0,), FeatureSlot(0)),
            Gate(GateKind.CRY, (1, 0), ParamSlot(0)),
            Gate(GateKind.CNOT, (0, 1)),
        ),
    )
    lines = ansatz_to_text(a).splitlines()
    assert lines == ["2 1", "RX 0 feature:0", "CRY 1,0 param:0", "CNOT 0,1 none"]


def test_file_round_trip(tmp_path):
    a = build_hea(HeaSpec(2, 1, 3))
    path = tmp_path / "ansatz.json"
    save_ansatz(a, path)
    assert load_ansatz(path) == a


def test_text_parse_errors():
    with pytest.raises(ParseError):
        ansatz_from_text("")
    with pytest.raises(ParseError):
        ansatz_from_text("2\nRX 0 none")
    with pytest.raises(ParseError):
        ansatz_from_text("2 0\nBOGUS 0 none")
    with pytest.raises(ParseError):
        ansatz_from_text("2 5\nRX 0 param:0")  # header/body mismatch


def test_from_dict_rejects_invalid():
    with pytest.raises(ParseError):
        ansatz_from_dict({"n_qubits": 2, "gates": [{"kind": "CNOT", "wires": [1, 1], "binding": {"type": "none"}}]})
