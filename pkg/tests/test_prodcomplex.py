from __future__ import annotations

import csv
import io
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from treecoh.errors import InputError, TruncationDepthError
from treecoh.prodcomplex import (
    CornerBlock,
    CornerTop,
    HoroballSpec,
    KBlock,
    MultiComplement,
    ProductComplex,
    Region,
    StrictSublevel,
    Sublevel,
    Superlevel,
    Whole,
    YHat,
    cell_dim,
    check_disjointness,
    fiber_cover,
    fiber_parameters,
    top_edge,
)
from treecoh.treegeo import RayEnd, build_regular, busemann_map, distinguished_end


def pc_regular(q, N, d, weights=None):
    t = build_regular(q, N)
    return ProductComplex([t] * d, weights)


def all_cells(pc):
    return list(product(*[pc.factor_codes(i) for i in range(pc.d)]))


def corner_betas(pc, cell, ends=None):
    vals = []
    for corner in pc.corners(cell):
        b = Fraction(0)
        for i, v in enumerate(corner):
            t = pc.factors[i]
            h = t.height(v) if ends is None else busemann_map(t, ends[i])[v]
            b += pc.weights[i] * h
        vals.append(b)
    return vals


def REGIONS(pc):
    t = pc.factors[0]
    xi = tuple(distinguished_end(f) for f in pc.factors)
    down = tuple(RayEnd(f.x(0), "lowest") for f in pc.factors)
    return [
        Whole(),
        Superlevel(0),
        Superlevel(Fraction(1, 2)),
        Sublevel(-1),
        Sublevel(1, xi),
        StrictSublevel(1),
        CornerBlock(1, -1),
        CornerTop(1, -1),
        YHat(0),
        YHat(-1),
        KBlock(1),
        MultiComplement([HoroballSpec(xi, 1), HoroballSpec(down, 1)]),
    ] if t.N >= 2 else [Whole(), Superlevel(0), Sublevel(0), KBlock(1)]


# --- fixed examples -------------------------------------------------------------


def test_edge_times_vertex_boundary():
    t = build_regular(2, 1)
    pc = ProductComplex([t, t])
    e = t.x(0)
    cell = (2 * e + 1, 2 * t.x(0))
    faces = dict((f, s) for s, f in pc.faces(cell))
    assert faces == {(2 * t.x(1), 2 * t.x(0)): 1, (2 * e, 2 * t.x(0)): -1}


def test_unit_square_boundary_squared():
    t = build_regular(2, 1)
    pc = ProductComplex([t, t])
    e = t.x(0)
    sq = (2 * e + 1, 2 * e + 1)
    edges = [f for _, f in pc.faces(sq)]
    verts = sorted({g for f in edges for _, g in pc.faces(f)})
    d2 = pc.boundary_between(edges, [sq])
    d1 = pc.boundary_between(verts, edges)
    assert (d1 @ d2).is_zero()


def test_top_cell_count_q2_n1():
    pc = pc_regular(2, 1, 2)
    ne = pc.factors[0].num_vertices - 1
    assert len(pc.region_cells(Whole(), 2)) == ne * ne == pc.count_cells(2)


@pytest.mark.parametrize("q,N,d", [(2, 1, 2), (2, 2, 2), (3, 1, 2), (2, 1, 3)])
def test_counts_match_product_formula(q, N, d):
    pc = pc_regular(q, N, d)
    for k in range(d + 1):
        assert len(pc.region_cells(Whole(), k)) == pc.count_cells(k)


def test_superlevel_above_max_is_empty_and_sublevel_above_max_is_all():
    pc = pc_regular(2, 2, 2)
    top = 2 * 2
    assert pc.region_cells(Superlevel(top + 1)) == []
    assert pc.region_cells(Sublevel(top)) == sorted(all_cells(pc))


def test_histogram_counts_match_enumeration():
    pc = pc_regular(2, 3, 2, [1, Fraction(1, 2)])
    for reg in (Whole(), Superlevel(Fraction(1, 2)), Sublevel(-1)):
        for n in (1, 2, 3):
            expect = [len(x) for x in pc.cells_by_dim(reg, n, True)]
            assert pc.count_by_dim(reg, n, True) == expect


def test_outside_complements_region():
    pc = pc_regular(2, 2, 2)
    for reg in REGIONS(pc):
        if reg.kind in ("corner", "corner_top"):
            continue
        inside = set(pc.iter_cells(reg, 2, True))
        outside = set(pc.iter_outside(reg, 2, True))
        assert not inside & outside
        assert inside | outside == set(pc.iter_cells(Whole(), 2, True))


def test_multi_complement_membership_brute_force():
    pc = pc_regular(2, 2, 2)
    xi = tuple(distinguished_end(t) for t in pc.factors)
    reg = MultiComplement([HoroballSpec(xi, 0)])
    expect = {c for c in all_cells(pc) if max(corner_betas(pc, c, xi)) <= 0}
    assert set(pc.iter_cells(reg)) == expect
    # the open complement is dense in it: every top cell meets beta < 0
    for c in expect:
        if cell_dim(c) == 2:
            assert min(corner_betas(pc, c, xi)) < 0


def test_corner_depth_errors():
    pc = pc_regular(2, 2, 2)
    with pytest.raises(TruncationDepthError):
        list(pc.iter_cells(CornerBlock(3, 0)))
    with pytest.raises(TruncationDepthError):
        list(pc.iter_cells(CornerBlock(1, -2)))


def test_region_errors():
    with pytest.raises(InputError):
        Region("nonsense")
    with pytest.raises(InputError):
        MultiComplement([])
    with pytest.raises(InputError):
        ProductComplex([build_regular(2, 1)], [0])


def test_out_of_range_boundary_is_empty_with_shape():
    pc = pc_regular(2, 1, 2)
    m = pc.boundary_matrix(Whole(), 3)
    assert (m.rows, m.cols) == (len(pc.region_cells(Whole(), 2)), 0)
    m0 = pc.boundary_matrix(Whole(), 0)
    assert (m0.rows, m0.cols) == (0, len(pc.region_cells(Whole(), 0)))


def test_cells_csv():
    pc = pc_regular(2, 1, 2)
    cells = pc.region_cells(Superlevel(1))
    rows = list(csv.reader(io.StringIO(pc.cells_csv(cells))))
    assert rows[0] == ["cell", "dim", "beta_min", "beta_max"]
    assert len(rows) == len(cells) + 1
    assert all(Fraction(r[2]) >= 1 for r in rows[1:])


# --- invariants -------------------------------------------------------------------


@pytest.mark.parametrize("q,N,d", [(2, 2, 2), (2, 1, 3)])
def test_boundary_squares_to_zero_and_regions_are_closed(q, N, d):
    pc = pc_regular(q, N, d)
    for reg in REGIONS(pc):
        cells = list(pc.iter_cells(reg))
        assert pc.is_face_closed(cells) is None, reg.label()
        for k in range(2, d + 1):
            assert (pc.boundary_matrix(reg, k - 1) @ pc.boundary_matrix(reg, k)).is_zero()


@pytest.mark.parametrize("reg", [Superlevel(0), Sublevel(1), Superlevel(Fraction(-1, 2))])
def test_level_membership_matches_corner_values(reg):
    pc = pc_regular(2, 2, 2, [1, Fraction(1, 2)])
    got = set(pc.iter_cells(reg))
    for c in all_cells(pc):
        vals = corner_betas(pc, c)
        want = min(vals) >= reg.r if reg.kind == "superlevel" else max(vals) <= reg.r
        assert (c in got) == want


def test_yhat_top_cells_have_min_m():
    pc = pc_regular(2, 2, 2)
    for m in (-1, 0, 1):
        for c in pc.region_cells(YHat(m), 2):
            assert min(corner_betas(pc, c)) == m


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([1, 2, Fraction(1, 2), Fraction(2, 3)]), min_size=2, max_size=3), st.data())
def test_flow_raises_beta_by_weight_sum(weights, data):
    t = build_regular(2, 2)
    pc = ProductComplex([t] * len(weights), weights)
    v = tuple(data.draw(st.sampled_from([u for u in t.vertices() if t.height(u) < 2])) for _ in weights)
    up = tuple(t.ascend(x) for x in v)
    assert pc.beta_vertex(up) == pc.beta_vertex(v) + sum(pc.weights)


# --- fibers -----------------------------------------------------------------------


def test_fiber_parameter_on_spine_edge():
    pc = pc_regular(2, 2, 2, [2, 1])
    xi = tuple(distinguished_end(t) for t in pc.factors)
    spec = HoroballSpec(xi, 3)
    t = pc.factors[0]
    assert fiber_parameters(pc, 0, t.x(0), [spec]) == [Fraction(3) - 2 * 1]


def test_fiber_parameter_equal_tops_give_equal_values():
    pc = pc_regular(2, 2, 2)
    xi = tuple(distinguished_end(t) for t in pc.factors)
    spec = HoroballSpec(xi, 0)
    t = pc.factors[0]
    a, b = t.children(t.x(0))
    assert fiber_parameters(pc, 0, a, [spec]) == fiber_parameters(pc, 0, b, [spec])


def test_fiber_parameter_rejects_non_edge():
    pc = pc_regular(2, 1, 2)
    xi = tuple(distinguished_end(t) for t in pc.factors)
    with pytest.raises(InputError):
        fiber_parameters(pc, 0, pc.factors[0].top, [HoroballSpec(xi, 0)])


def _two_specs(pc):
    xi = tuple(distinguished_end(t) for t in pc.factors)
    down = tuple(RayEnd(t.x(0), "lowest") for t in pc.factors)
    return [HoroballSpec(xi, 1), HoroballSpec(down, 1)]


@pytest.mark.parametrize("w", [0, 1])
def test_fiber_cover_checks(w):
    pc = pc_regular(2, 3, 2)
    cover = fiber_cover(pc, w, MultiComplement(_two_specs(pc)))
    assert cover.ok, (cover.uncovered[:3], cover.intersection_failures[:3], cover.fiber_mismatches[:3],
                      cover.dichotomy_failures[:3])


def test_fiber_cover_three_factors():
    pc = pc_regular(2, 2, 3)
    cover = fiber_cover(pc, 2, MultiComplement(_two_specs(pc)))
    assert cover.ok


def test_vertex_fiber_extends_across_non_top_edges():
    pc = pc_regular(2, 3, 2)
    t = pc.factors[0]
    for spec in _two_specs(pc):
        cells = set(pc.iter_cells(MultiComplement([spec])))
        for c in cells:
            y = c[0] >> 1
            if c[0] & 1 or not (-t.N < t.height(y) < t.N):
                continue
            up = top_edge(pc, 0, y, spec)
            for e in t.incident_edges(y):
                if e != up:
                    assert (2 * e + 1,) + c[1:] in cells


# --- disjointness -----------------------------------------------------------------


def test_same_end_never_disjoint():
    pc = pc_regular(2, 2, 2)
    xi = tuple(distinguished_end(t) for t in pc.factors)
    rep = check_disjointness(pc, [HoroballSpec(xi, 0), HoroballSpec(xi, 2)])
    assert not rep.disjoint and not rep.ok
    i, j, a, b = rep.witness
    assert a == b and rep.distance == 0


def test_opposite_ends_disjoint_with_brute_distance():
    t = build_regular(2, 3)
    pc = ProductComplex([t])
    up = (distinguished_end(t),)
    down = (RayEnd(t.x(0), "lowest"),)
    rep = check_disjointness(pc, [HoroballSpec(up, 1), HoroballSpec(down, 1)], margin=2)
    assert rep.disjoint and rep.ok
    A = [v for v in t.vertices() if t.height(v) >= 1]
    B = [v for v in t.vertices() if busemann_map(t, down[0])[v] >= 1]
    assert rep.distance == min(t.distance(a, b) for a in A for b in B) == 2
    assert not check_disjointness(pc, [HoroballSpec(up, 1), HoroballSpec(down, 1)], margin=3).ok


def test_touching_horoballs_fail_at_margin_zero():
    t = build_regular(2, 2)
    pc = ProductComplex([t])
    up = (distinguished_end(t),)
    down = (RayEnd(t.x(0), "lowest"),)
    rep = check_disjointness(pc, [HoroballSpec(up, 0), HoroballSpec(down, 0)], margin=0)
    assert not rep.ok
    assert rep.witness[2] == rep.witness[3] == (t.x(0),)
    assert rep.to_json_obj()["distance"] == 0
