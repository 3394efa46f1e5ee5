import io
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from upmclp.graph import Network, shortest_distances
from upmclp.instance import (FormatError, GeneratorConfig, Instance, calibrate_radius,
                             compute_bmax, generate_geometric, is_normalized, normalize,
                             p_from_rule, parse_kv, read_instance, read_orlibrary, toy_instance,
                             write_instance)
from upmclp.oracle import mclp_by_enumeration


def _inst(edges, n=3, p=1, R=2.0, B=1.0):
    return Instance(Network.from_edges(n, edges), np.ones(n), p, R, B)


def test_normalize_caps_then_deletes():
    inst = _inst([(0, 1, 5.0, 4.0, 1.0), (1, 2, 1.0, 0.5, 4.0)], R=2.0, B=1.0)
    out, log = normalize(inst)
    # edge 0: u capped to 1 -> l-u = 4 > R, dropped; edge 1: c*u = 2 > 1, u -> 0.25
    assert [e for e, *_ in log.capped] == [0, 1]
    assert [e for e, *_ in log.deleted] == [0]
    assert out.net.m == 1 and out.net.max_reduction[0] == pytest.approx(0.25)
    assert is_normalized(out)
    again, log2 = normalize(out)
    assert not log2.changed and again is out


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.5, 30.0), st.floats(0.0, 50.0))
def test_normalize_idempotent(seed, R, B):
    inst = generate_geometric(GeneratorConfig(n=5, seed=seed),
                              mclp_solver=lambda d, w, p, r: mclp_by_enumeration(d, w, p, r)[0])
    inst = inst.with_params(R=R, B=B)
    once, _ = normalize(inst)
    twice, log = normalize(once)
    assert not log.changed
    assert is_normalized(once)
    assert np.all(once.net.cost * once.net.max_reduction <= B * (1 + 1e-7) + 1e-12)


def test_bmax_toy_and_small_cases():
    assert compute_bmax(toy_instance()) == pytest.approx(0.75)
    assert compute_bmax(_inst([(0, 1, 1.0, 0.0, 2.0)])) == 0.0
    assert compute_bmax(_inst([(0, 1, 2.0, 0.5, 2.0)], n=4)) == pytest.approx(1.0)


@pytest.mark.parametrize("rule,n,p", [("1", 50, 1), ("n/10", 50, 5), ("n/20", 50, 3),
                                      ("n/20", 10, 1), ("n/10", 4, 1), ("n/10", 15, 2)])
def test_p_rules(rule, n, p):
    assert p_from_rule(rule, n) == p


def test_p_rule_unknown():
    with pytest.raises(ValueError):
        p_from_rule("sqrt", 10)


def test_generator_is_deterministic_and_in_ranges():
    cfg = GeneratorConfig(n=9, seed=4, budget_fraction=0.01)
    a, b = generate_geometric(cfg), generate_geometric(cfg)
    assert write_instance(a) == write_instance(b)
    net = a.net
    assert net.m == 36
    assert set(np.unique(net.cost)) <= {1.0, 2.0, 3.0}
    base = net.length - net.max_reduction
    assert np.all(net.max_reduction < 0.3 * base + 1e-12)
    assert np.all((a.weights >= 1) & (a.weights <= 100))
    assert a.B == pytest.approx(0.01 * compute_bmax(a))
    assert generate_geometric(GeneratorConfig(n=9, seed=5)).net.length[0] != net.length[0]


def test_canonical_roundtrip():
    inst = generate_geometric(GeneratorConfig(n=6, seed=1))
    text = write_instance(inst)
    back = read_instance(text)
    assert write_instance(back) == text
    assert back.p == inst.p and back.R == pytest.approx(inst.R, rel=1e-8)


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("UPMCLP 2\n", 1),
    ("UPMCLP 1\nNODES 2\nWEIGHTS 1\n", 3),
    ("UPMCLP 1\nNODES 2\nWEIGHTS 1 1\nEDGES 1\n1 2 1 0\n", 5),
    ("UPMCLP 1\nNODES 2\nWEIGHTS 1 1\nEDGES 1\n1 2 1 x 1\n", 5),
    ("UPMCLP 1\nNODES 2\nWEIGHTS 1 1\nEDGES 1\n1 2 1 0 1\nPARAMS 3 1 0\n", 6),
])
def test_format_errors_carry_line(text, line):
    with pytest.raises(FormatError) as exc:
        read_instance(text)
    assert exc.value.lineno == line


ORLIB = """4 4 1
1 2 3
2 3 4
3 4 5
1 4 6
"""


def test_orlibrary_reader():
    cfg = GeneratorConfig(n=4, seed=0, topology="or-library")
    inst = read_orlibrary(io.StringIO(ORLIB), cfg)
    assert inst.n == 4 and inst.net.m == 4
    base = inst.net.length - inst.net.max_reduction
    assert np.allclose(base, [3, 4, 5, 6])
    dup = ORLIB.replace("4 4 1", "4 5 1") + "2 1 9\n"
    with pytest.raises(FormatError):
        read_orlibrary(dup, cfg)
    last = read_orlibrary(dup, cfg, duplicates="last")
    e = last.net.edge_index(0, 1)
    assert last.net.length[e] - last.net.max_reduction[e] == pytest.approx(9.0)
    with pytest.raises(FormatError):
        read_orlibrary("4 1 1\n1 5 2\n", cfg)


def test_parse_kv():
    kv = parse_kv("a=1\n# c\n b = x=y \n\n")
    assert kv == {"a": "1", "b": "x=y"}
    with pytest.raises(FormatError):
        parse_kv("novalue\n")


def _enum(d, w, p, R):
    return mclp_by_enumeration(d, w, p, R)[0]


@pytest.mark.parametrize("seed", range(5))
def test_calibration_is_minimal(seed):
    inst = generate_geometric(GeneratorConfig(n=7, seed=seed, coverage_target=0.6),
                              mclp_solver=_enum)
    cal = calibrate_radius(inst, 0.6, _enum, return_info=True)
    d = shortest_distances(inst.net)
    goal = 0.6 * inst.weights.sum()
    assert cal.reached and cal.coverage >= goal - 1e-9
    smaller = [v for v in np.unique(d[np.triu_indices(7, 1)]) if 0 < v < cal.R]
    if smaller:
        assert _enum(d, inst.weights, inst.p, smaller[-1]) < goal


def test_calibration_unreachable_warns():
    net = Network.from_edges(3, [(0, 1, 1.0, 0.0, 1.0)])
    inst = Instance(net, np.ones(3), 1, 1.0, 0.0)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        cal = calibrate_radius(inst, 1.0, _enum, return_info=True)
    assert not cal.reached and any(issubclass(w.category, RuntimeWarning) for w in rec)


def test_toy_instance_shape():
    inst = toy_instance()
    assert (inst.n, inst.net.m, inst.p, inst.R, inst.B) == (6, 5, 2, 1.0, 0.75)
    assert is_normalized(inst)
