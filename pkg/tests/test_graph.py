import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from upmclp.graph import (Network, incident_arcs, shortest_distances, upgraded_distances)


@st.composite
def networks(draw, max_n=7):
    n = draw(st.integers(2, max_n))
    all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.lists(st.sampled_from(all_pairs), unique=True, max_size=len(all_pairs)))
    edges = []
    for a, b in chosen:
        l = draw(st.floats(0.1, 10.0))
        u = draw(st.floats(0.0, 0.99)) * l
        c = draw(st.floats(0.0, 3.0))
        edges.append((a, b, l, u, c))
    return Network.from_edges(n, edges)


def _scipy_apsp(net, w):
    mat = np.zeros((net.n, net.n))
    # scipy treats explicit zeros as missing edges, lengths here are positive
    for e in range(net.m):
        a, b = int(net.tail[e]), int(net.head[e])
        mat[a, b] = mat[b, a] = w[e]
    return shortest_path(csr_matrix(mat), directed=False)


@settings(max_examples=60, deadline=None)
@given(networks())
def test_distance_matrix_properties(net):
    for flag in (False, True):
        d = shortest_distances(net, flag)
        assert np.allclose(np.diag(d), 0.0)
        assert np.array_equal(d, d.T)
        n = net.n
        for k in range(n):
            assert np.all(d <= d[:, [k]] + d[[k], :] + 1e-9)


@settings(max_examples=60, deadline=None)
@given(networks())
def test_floyd_warshall_matches_scipy_dijkstra(net):
    ref = _scipy_apsp(net, net.length)
    assert np.allclose(shortest_distances(net), ref, equal_nan=True)
    ref_u = _scipy_apsp(net, net.length - net.max_reduction)
    assert np.allclose(shortest_distances(net, True), ref_u)


@settings(max_examples=40, deadline=None)
@given(networks())
def test_upgrades_shrink_distances(net):
    full = upgraded_distances(net, net.max_reduction)
    assert np.allclose(full, shortest_distances(net, True))
    zero = upgraded_distances(net, np.zeros(net.m))
    assert np.allclose(zero, shortest_distances(net))
    assert np.all(full <= zero + 1e-12)


def test_disconnected_is_inf():
    net = Network.from_edges(3, [(0, 1, 1.0, 0.0, 1.0)])
    d = shortest_distances(net)
    assert d[0, 2] == np.inf and d[0, 1] == 1.0


def test_arcs_and_incidence():
    net = Network.from_edges(3, [(0, 1, 1.0, 0.0, 1.0), (2, 1, 2.0, 0.5, 1.0)])
    assert (net.arc_tail(0), net.arc_head(0)) == (0, 1)
    assert (net.arc_tail(1), net.arc_head(1)) == (1, 0)
    assert (net.arc_tail(2), net.arc_head(2)) == (2, 1)
    out, inc = incident_arcs(net, 1)
    assert sorted(out) == [1, 3] and sorted(inc) == [0, 2]
    assert net.edge_index(1, 2) == 1
    assert net.degree(1) == 2


@pytest.mark.parametrize("edges", [
    [(0, 0, 1.0, 0.0, 1.0)],
    [(0, 1, 1.0, 0.0, 1.0), (1, 0, 2.0, 0.0, 1.0)],
    [(0, 1, 0.0, 0.0, 1.0)],
    [(0, 1, 1.0, 1.0, 1.0)],
    [(0, 1, 1.0, -0.1, 1.0)],
    [(0, 1, 1.0, 0.0, -1.0)],
    [(0, 5, 1.0, 0.0, 1.0)],
])
def test_invalid_networks_rejected(edges):
    with pytest.raises(ValueError):
        Network.from_edges(3, edges)
