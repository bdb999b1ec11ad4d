from __future__ import annotations

import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from treecoh.dl import (
    CodedVertex,
    DLVertex,
    Lamplighter,
    act_tree_pair,
    check_action,
    dl_graph,
    dl_isomorphism,
    edge_list_csv,
    lamplighter_act,
    slab_cocompactness,
    slab_vertices,
    solve_transport,
    tree_coding,
    y0_graph,
)
from treecoh.errors import InputError, TruncationDepthError
from treecoh.prodcomplex import ProductComplex
from treecoh.treegeo import build_regular


def lamplighters(q, span=3):
    lamps = st.dictionaries(st.integers(-span, span), st.integers(0, q - 1), max_size=2 * span)
    return st.builds(lambda g, s: Lamplighter.make(q, g, s), lamps, st.integers(-span, span))


def dl_vertices(q, span=3):
    conf = st.dictionaries(st.integers(-span, span), st.integers(0, q - 1), max_size=2 * span)
    return st.builds(lambda k, c: DLVertex.from_configuration(k, c, q), st.integers(-span, span), conf)


# ---------------------------------------------------------------------------
# coding
# ---------------------------------------------------------------------------


def test_coded_parent_forgets_the_digit_at_its_height():
    v = CodedVertex(-1, ((-1, 1), (2, 1)))
    assert v.parent() == CodedVertex(0, ((2, 1),))
    assert all(c.parent() == v for c in v.children(3))
    assert len(set(v.children(3))) == 3


def test_tree_coding_matches_tree_parents():
    t = build_regular(2, 3)
    code = tree_coding(t)
    assert len(set(code.values())) == len(code)
    for v in t.vertices():
        if v != t.top:
            assert code[t.parent(v)] == code[v].parent()
        assert code[v].height == t.height(v)


def test_opposite_heights_required():
    with pytest.raises(InputError):
        DLVertex(CodedVertex(1), CodedVertex(0))


@given(dl_vertices(3))
def test_configuration_roundtrip(x):
    assert DLVertex.from_configuration(x.k, x.configuration(), 3) == x


@given(dl_vertices(2))
def test_neighbour_relation_is_symmetric(x):
    for y in x.neighbours(2):
        assert x in y.neighbours(2)
    assert len(set(x.neighbours(2))) == 4


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("q,N", [(2, 1), (2, 2), (3, 1)])
def test_coded_graph_counts(q, N):
    G = dl_graph(q, N)
    assert G.number_of_nodes() == (2 * N + 1) * q ** (2 * N)
    # every vertex below the top has q up-down moves into each lower level within the box
    assert G.number_of_edges() == 2 * N * q ** (2 * N) * q


@pytest.mark.parametrize("q,N", [(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)])
def test_isomorphism_with_level_zero_graph(q, N):
    rep = dl_isomorphism(q, N)
    assert rep.ok, rep.to_json_obj()


def test_level_graph_needs_two_factors():
    t = build_regular(2, 1)
    with pytest.raises(InputError):
        y0_graph(ProductComplex([t] * 3))


def test_bad_graph_parameters():
    with pytest.raises(InputError):
        dl_graph(1, 2)
    with pytest.raises(InputError):
        dl_graph(2, 0)


def test_edge_list_csv_is_deterministic():
    a, b = edge_list_csv(dl_graph(2, 1)), edge_list_csv(dl_graph(2, 1))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "source,target"
    pairs = [tuple(map(int, ln.split(","))) for ln in lines[1:]]
    assert pairs == sorted(pairs) and all(s < t for s, t in pairs)
    assert len(pairs) == dl_graph(2, 1).number_of_edges()


# ---------------------------------------------------------------------------
# the group and its action
# ---------------------------------------------------------------------------


@settings(max_examples=60)
@given(lamplighters(2), lamplighters(2), lamplighters(2))
def test_group_law_is_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(lamplighters(3))
def test_inverse(a):
    one = Lamplighter(3)
    assert a * a.inverse() == one == a.inverse() * a


@settings(max_examples=60)
@given(lamplighters(2), lamplighters(2), dl_vertices(2))
def test_action_is_a_left_action(g, h, x):
    assert lamplighter_act(g * h, x) == lamplighter_act(g, lamplighter_act(h, x))


@given(lamplighters(3), dl_vertices(3))
def test_action_preserves_adjacency_and_level(g, x):
    gx = lamplighter_act(g, x)
    assert gx.u.height + gx.v.height == 0
    for y in x.neighbours(3):
        assert lamplighter_act(g, y) in gx.neighbours(3)


@given(lamplighters(2), dl_vertices(2))
def test_action_on_pairs_moves_parents_to_parents(g, x):
    u, v = act_tree_pair(g, x.u, x.v)
    pu, pv = act_tree_pair(g, x.u.parent(), x.v.parent())
    assert (pu, pv) == (u.parent(), v.parent())


@given(dl_vertices(2), dl_vertices(2))
def test_transport_is_unique(x, y):
    g = solve_transport(x, y, 2)
    assert lamplighter_act(g, x) == y
    # any element with the same effect is g itself
    assert solve_transport(y, x, 2) == g.inverse()


def test_budget_is_enforced():
    x = DLVertex.from_configuration(0, {}, 2)
    with pytest.raises(TruncationDepthError):
        lamplighter_act(Lamplighter(2, (), 3), x, budget=2)
    assert lamplighter_act(Lamplighter(2, (), 1), x, budget=2).k == 1


@pytest.mark.parametrize("q", [2, 3])
def test_check_action_report(q):
    rep = check_action(q, samples=500, seed=4)
    assert rep.ok, rep.to_json_obj()


# ---------------------------------------------------------------------------
# slabs
# ---------------------------------------------------------------------------


def brute_orbits(q, level, N, span):
    """Orbit count by trying every group element with lamps and shift in a box."""
    verts = list(slab_vertices(q, level, N))
    index = {p: i for i, p in enumerate(verts)}
    parent = list(range(len(verts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    positions = range(-span, span)
    elements = [Lamplighter.make(q, dict(zip(positions, g)), s)
                for s in range(-span, span + 1) for g in product(range(q), repeat=len(positions))]
    for p in verts:
        for g in elements:
            img = act_tree_pair(g, *p)
            if img in index:
                a, b = find(index[p]), find(index[img])
                parent[a] = b
    return len({find(i) for i in range(len(verts))})


@pytest.mark.parametrize("level", [-2, -1, 0, 1, 2])
def test_slab_orbits_against_brute_force(level):
    rep = slab_cocompactness(2, (level, level), 2)
    assert rep.orbits[level] == brute_orbits(2, level, 2, 3)


def test_nonnegative_levels_have_one_orbit():
    rep = slab_cocompactness(3, (0, 2), 2)
    assert rep.orbits == {0: 1, 1: 1, 2: 1} and rep.one_per_level and rep.total == 3


@pytest.mark.parametrize("q", [2, 3])
def test_negative_levels_have_q_power_orbits(q):
    rep = slab_cocompactness(q, (-2, -1), 2)
    assert rep.orbits == {-2: q ** 2, -1: q}
    assert not rep.one_per_level


def test_slab_examples():
    assert slab_cocompactness(2, (0, 0), 2).total == 1
    assert slab_cocompactness(2, (0, 2), 2).total == 3
    empty = slab_cocompactness(2, (1, 0), 2)
    assert empty.total == 0 and empty.levels == []


def test_slab_outside_budget():
    with pytest.raises(TruncationDepthError):
        slab_cocompactness(2, (0, 3), 2)


def test_random_transport_between_slab_vertices():
    rng = random.Random(1)
    verts = list(slab_vertices(2, 0, 2))
    for _ in range(50):
        (u, v), (u2, v2) = rng.choice(verts), rng.choice(verts)
        x, y = DLVertex(u, v), DLVertex(u2, v2)
        assert lamplighter_act(solve_transport(x, y, 2), x) == y
