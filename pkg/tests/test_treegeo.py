from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from treecoh.errors import BoundaryError, InputError, TruncationDepthError
from treecoh.treegeo import (
    RayEnd,
    TruncatedTree,
    build_regular,
    build_tree,
    busemann_map,
    busemann_value,
    distinguished_end,
)


def bfs_distance(tree, u, v):
    """Plain breadth-first search over the undirected tree."""
    seen = {u: 0}
    frontier = [u]
    while frontier:
        nxt = []
        for a in frontier:
            nbrs = list(tree.children(a))
            if tree.parent(a) is not None:
                nbrs.append(tree.parent(a))
            for b in nbrs:
                if b not in seen:
                    seen[b] = seen[a] + 1
                    nxt.append(b)
        frontier = nxt
    return seen[v]


def test_ec_counts_examples():
    assert len(build_regular(2, 1).ec_set(1)) == 4
    assert len(build_regular(3, 1).ec_set(1)) == 9


@pytest.mark.parametrize("q,N", [(2, 1), (2, 2), (2, 3), (3, 2)])
def test_ec_counts_by_path_enumeration(q, N):
    t = build_regular(q, N)
    for n in range(N + 1):
        paths = list(itertools.product(range(q), repeat=2 * n))
        assert len(t.ec_set(n)) == len(paths) == q ** (2 * n)


@pytest.mark.parametrize("q,N", [(2, 1), (2, 3), (3, 2)])
def test_tree_invariants(q, N):
    t = build_regular(q, N)
    assert t.height(t.x(0)) == 0
    assert t.num_vertices == sum(q ** k for k in range(2 * N + 1))
    for v in t.vertices():
        for c in t.children(v):
            assert t.height(c) == t.height(v) - 1
            assert t.ascend(c) == v
        if t.height(v) > -N:
            assert len(t.children(v)) == q
    for n in range(-N, N):
        assert t.ascend(t.x(n)) == t.x(n + 1)


def test_ascend_from_ec_reaches_spine():
    t = build_regular(2, 2)
    for n in (1, 2):
        for v in t.ec_set(n):
            assert t.ascend(v, 2 * n) == t.x(n)
            assert t.is_below(v, t.x(n))


def test_ascend_top_is_boundary_error():
    t = build_regular(2, 1)
    with pytest.raises(BoundaryError):
        t.ascend(t.top)


def test_errors():
    with pytest.raises(InputError):
        build_regular(1, 2)
    with pytest.raises(InputError):
        build_regular(2, 0)
    t = build_regular(2, 2)
    with pytest.raises(InputError):
        t.ec_set(3)


def test_explicit_branching():
    t = build_tree(2, lambda v, h: 2 if h % 2 == 0 else 3)
    assert t.q is None
    assert len(t.ec_set(1)) == 6
    assert TruncatedTree.from_json_obj(t.to_json_obj()).to_json() == t.to_json()


def test_json_roundtrip():
    t = build_regular(2, 2)
    obj = t.to_json_obj()
    assert set(obj) == {"q", "N", "vertices", "spine"}
    back = TruncatedTree.from_json_obj(obj)
    assert back.to_json_obj() == obj


def test_json_rejects_inconsistent_children():
    obj = build_regular(2, 1).to_json_obj()
    obj["vertices"][0]["children"] = [1]
    with pytest.raises(InputError):
        TruncatedTree.from_json_obj(obj)


def test_busemann_examples():
    t = build_regular(2, 3)
    down = RayEnd(t.x(0), "lowest")
    assert busemann_value(t, t.x(0), down) == 0
    assert busemann_value(t, t.x(1), down) == -1
    assert bfs_distance(t, t.x(1), down.ray(t)[2]) == 3
    xi = distinguished_end(t)
    for v in t.vertices():
        assert busemann_value(t, v, xi) == t.height(v)


def test_busemann_horizon_error():
    t = build_regular(2, 3)
    end = RayEnd(t.x(0), "lowest")
    off_ray = t.children(t.x(-1))[1]
    with pytest.raises(TruncationDepthError):
        busemann_value(t, off_ray, end, horizon=1)
    assert busemann_value(t, off_ray, end, horizon=2) == busemann_value(t, off_ray, end)


@pytest.mark.parametrize("rule,choices", [("lowest", ()), ("highest", ()), ("lowest", (1, 0, 1)), ("up", ())])
def test_busemann_map_matches_limit_definition(rule, choices):
    t = build_regular(2, 3)
    end = RayEnd(t.x(0), rule, choices)
    ray = end.ray(t)
    fast = busemann_map(t, end)
    for v in t.vertices():
        T = len(ray) - 1
        assert fast[v] == T - bfs_distance(t, v, ray[T]) == busemann_value(t, v, end)


def test_reverse_triangle_depth_two():
    t = build_regular(2, 2)
    for end in (RayEnd(t.x(0)), RayEnd(t.x(1), "highest"), distinguished_end(t)):
        b = busemann_map(t, end)
        for v in t.vertices():
            for w in t.vertices():
                assert abs(b[v] - b[w]) <= t.distance(v, w)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.integers(1, 3), st.data())
def test_distance_matches_bfs(q, N, data):
    t = build_regular(q, N)
    u = data.draw(st.integers(0, t.num_vertices - 1))
    v = data.draw(st.integers(0, t.num_vertices - 1))
    assert t.distance(u, v) == bfs_distance(t, u, v)
    assert t.is_below(u, v) == (t.distance(u, v) == t.height(v) - t.height(u))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(1, 3), min_size=1, max_size=4), st.data())
def test_random_branching_invariants(N, pattern, data):
    t = build_tree(N, lambda v, h: pattern[v % len(pattern)])
    anchor = data.draw(st.integers(0, t.num_vertices - 1))
    end = RayEnd(anchor, data.draw(st.sampled_from(["lowest", "highest", "up"])))
    b = busemann_map(t, end)
    assert b[anchor] == 0
    for v in t.vertices():
        if t.parent(v) is not None:
            assert abs(b[v] - b[t.parent(v)]) == 1
    for n in range(N + 1):
        assert all(t.in_c(v, n) for v in t.ec_set(n))
