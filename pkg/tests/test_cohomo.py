from __future__ import annotations

from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import relative_free_ranks
from treecoh.cohomo import (
    TowerWindow,
    colimit_map,
    corner_block_cohomology,
    corner_crosscheck,
    corner_depth,
    corner_model,
    eventual_death_check,
    hcu_assemble,
    relative_cohomology,
    truncation_pair,
)
from treecoh.errors import InputError, TruncationDepthError
from treecoh.exactalg import QQ, ZZ, PrimeField, SparseIntMatrix, smith
from treecoh.prodcomplex import (
    HoroballSpec,
    MultiComplement,
    ProductComplex,
    StrictSublevel,
    Sublevel,
    Superlevel,
    Whole,
)
from treecoh.treegeo import RayEnd, build_regular, distinguished_end


def pc_regular(q, N, d):
    t = build_regular(q, N)
    return ProductComplex([t] * d)


def brute_ranks(pc, region, n):
    cells = [c for c in product(*[pc.factor_codes(i, n, True) for i in range(pc.d)]) if pc.contains(region, c)]
    return relative_free_ranks(pc, cells)


# --- whole stage ---------------------------------------------------------------

@pytest.mark.parametrize("q,n,d", [(2, 1, 1), (3, 1, 1), (2, 2, 1), (2, 1, 2), (3, 1, 2), (2, 1, 3)])
def test_whole_stage_is_top_degree_free_of_corner_rank(q, n, d):
    pc = pc_regular(q, max(n, 1), d)
    g = relative_cohomology(pc, Whole(), n)
    assert g.concentrated_in(d)
    assert g[d].free_rank == q ** (2 * n * d) == corner_model(pc, n).size
    assert not g[d].invariant_factors


def test_rank_sixteen_example():
    pc = pc_regular(2, 1, 2)
    g = relative_cohomology(pc, Whole(), 1)
    assert [g[k].free_rank for k in range(3)] == [0, 0, 16]


def test_empty_region_is_zero():
    pc = pc_regular(2, 2, 2)
    assert relative_cohomology(pc, Superlevel(100), 2).is_zero


# --- agreement with a dense oracle ------------------------------------------------

def _regions(pc):
    xi = tuple(distinguished_end(t) for t in pc.factors)
    down = tuple(RayEnd(t.x(0), "lowest") for t in pc.factors)
    return [Whole(), Superlevel(0), Superlevel(1), Sublevel(0), Sublevel(-1), StrictSublevel(1),
            MultiComplement([HoroballSpec(xi, 1), HoroballSpec(down, 1)])]


@pytest.mark.parametrize("idx", range(7))
def test_free_ranks_match_dense_oracle(idx):
    pc = pc_regular(2, 2, 2)
    region = _regions(pc)[idx]
    g = relative_cohomology(pc, region, 1, strategy="direct")
    assert {k: g[k].free_rank for k in range(3)} == brute_ranks(pc, region, 1)


@pytest.mark.parametrize("r", [-1, 0, 1])
def test_complement_strategy_matches_direct(r):
    pc = pc_regular(2, 2, 2)
    for n in (1, 2):
        a = relative_cohomology(pc, Sublevel(r), n, strategy="direct")
        b = relative_cohomology(pc, Sublevel(r), n, strategy="complement")
        assert a.to_json_obj() == b.to_json_obj()


def test_rings_agree_on_torsion_free_groups():
    pc = pc_regular(2, 2, 2)
    for region in _regions(pc):
        gz = relative_cohomology(pc, region, 1, ZZ)
        gq = relative_cohomology(pc, region, 1, QQ)
        gp = relative_cohomology(pc, region, 1, PrimeField(3))
        for k in range(3):
            if not gz[k].invariant_factors:
                assert gz[k].free_rank == gq[k].free_rank == gp[k].free_rank


def test_stage_beyond_depth_raises():
    pc = pc_regular(2, 1, 2)
    with pytest.raises(TruncationDepthError):
        relative_cohomology(pc, Whole(), 2)


# --- corner blocks --------------------------------------------------------------

@pytest.mark.parametrize("m,r", [(0, -1), (0, 0), (1, -1), (1, 0), (1, 1), (2, 0)])
def test_corner_blocks_vanish(m, r):
    d = 2
    pc = pc_regular(2, corner_depth(d, m, r), d)
    assert corner_block_cohomology(pc, m, r).is_zero


def test_corner_depth_values():
    assert corner_depth(2, 1, -1) == 2
    assert corner_depth(3, 1, -1) == 3
    assert corner_depth(2, 0, 5) == 1
    assert corner_depth(2, 3, Fraction(1, 2)) == 3


# --- colimit maps ---------------------------------------------------------------

def test_colimit_identity_at_equal_stages():
    pc = pc_regular(2, 2, 2)
    M = colimit_map(pc, Whole(), 1, 1, 2)
    assert M == SparseIntMatrix.identity(16)


def test_colimit_maps_compose():
    pc = pc_regular(2, 3, 1)
    for region in (Whole(), Sublevel(0)):
        a = colimit_map(pc, region, 1, 2, 1)
        b = colimit_map(pc, region, 2, 3, 1)
        c = colimit_map(pc, region, 1, 3, 1)
        assert b @ a == c


def test_whole_colimit_has_unit_divisors_like_corner_transition():
    pc = pc_regular(2, 2, 2)
    M = colimit_map(pc, Whole(), 1, 2, 2)
    F = corner_model(pc, 1).transition(corner_model(pc, 2))
    assert M.shape == F.shape == (256, 16)
    assert smith(M).divisors == smith(F).divisors == [1] * 16


def test_colimit_rejects_backwards():
    pc = pc_regular(2, 2, 1)
    with pytest.raises(InputError):
        colimit_map(pc, Whole(), 2, 1, 1)


def test_extension_by_zero_is_a_cochain_map():
    pc = pc_regular(2, 2, 2)
    small, big = truncation_pair(pc, Sublevel(0), 1), truncation_pair(pc, Sublevel(0), 2)
    for k in range(2):
        assert big.delta(k) @ small.extension(big, k) == small.extension(big, k + 1) @ small.delta(k)


# --- eventual death --------------------------------------------------------------

@pytest.mark.parametrize("r", [-1, 0, 1])
def test_horoball_classes_die(r):
    pc = pc_regular(2, 4, 1)
    for k in range(2):
        assert eventual_death_check(pc, Superlevel(r), k, 2).ok


def test_sublevel_top_degree_persists_below_it_dies():
    pc = pc_regular(2, 4, 1)
    assert eventual_death_check(pc, Sublevel(0), 0, 1).ok
    rep = eventual_death_check(pc, Sublevel(0), 1, 1)
    assert rep.persists and not rep.ok and rep.witness is not None


def test_death_window_too_long():
    pc = pc_regular(2, 2, 1)
    with pytest.raises(TruncationDepthError):
        eventual_death_check(pc, Whole(), 1, 3)


def test_death_strategies_agree():
    pc = pc_regular(2, 3, 2)
    for k in range(2):
        a = eventual_death_check(pc, Sublevel(0), k, 1, strategy="direct")
        b = eventual_death_check(pc, Sublevel(0), k, 1, strategy="complement")
        assert a.image_ranks == b.image_ranks


# --- corner model ----------------------------------------------------------------

def test_corner_crosscheck_direct():
    pc = pc_regular(2, 2, 2)
    rep = corner_crosscheck(pc, 1, strategy="direct")
    assert rep.ok, rep.checks


def test_corner_crosscheck_factored_agrees():
    pc = pc_regular(2, 2, 2)
    rep = corner_crosscheck(pc, 1, strategy="factored", samples=50)
    assert rep.ok, rep.checks


def test_corner_index_roundtrip():
    M = corner_model(pc_regular(3, 1, 2), 1)
    for k in range(M.size):
        assert M.index(M.tuple_at(k)) == k


def test_transition_preimage_count():
    pc = pc_regular(2, 2, 2)
    F = corner_model(pc, 1).transition(corner_model(pc, 2), coords="standard")
    for j in range(F.cols):
        assert sum(1 for (i, jj), v in F.items() if jj == j) == 2 ** 2


# --- towers ------------------------------------------------------------------------

def _one(a):
    return SparseIntMatrix(1, 1, {(0, 0): a} if a else {})


def test_times_two_tower():
    rep = hcu_assemble(TowerWindow.constant(1, 3, _one(2)))
    assert rep.lim_rank == 1
    assert rep.lim_index.invariant_factors == (4,)
    assert [m.invariant_factors for m in rep.defects] == [(2,), (2,)]
    assert rep.lim1_window.invariant_factors == (2, 2) and not rep.stabilizes
    assert rep.delta_cokernel.is_zero


def test_times_two_tower_over_rationals_has_no_defect():
    rep = hcu_assemble(TowerWindow.constant(1, 3, _one(2), QQ))
    assert rep.lim_index.is_zero and rep.lim1_window.is_zero


def test_identity_and_zero_towers():
    ident = hcu_assemble(TowerWindow.constant(2, 4, SparseIntMatrix.identity(2)))
    assert ident.lim_rank == 2 and ident.lim1_window.is_zero and ident.lim_index.is_zero
    empty = hcu_assemble(TowerWindow.constant(0, 3, SparseIntMatrix.zero(0, 0)))
    assert empty.lim_rank == 0 and empty.lim1_window.is_zero and empty.lim_index.is_zero


def test_zero_maps_give_one_transient_defect():
    rep = hcu_assemble(TowerWindow.constant(2, 4, SparseIntMatrix.zero(2, 2)))
    assert rep.lim_rank == 0
    assert rep.defects[0].free_rank == 2
    assert all(m.is_zero for m in rep.defects[1:]) and rep.stabilizes


def test_tower_shape_mismatch():
    with pytest.raises(InputError):
        TowerWindow(0, [1, 2], [SparseIntMatrix.zero(1, 1)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-6, 6).filter(lambda x: x != 0), min_size=1, max_size=4))
def test_scalar_tower_defects_multiply_to_composite(factors):
    """For nonzero scalars the defects' orders multiply to |a_1 ... a_k|."""
    w = TowerWindow(0, [1] * (len(factors) + 1), [_one(a) for a in factors])
    rep = hcu_assemble(w)
    total = 1
    for m in rep.defects:
        for x in m.invariant_factors:
            total *= x
    prod_ = 1
    for a in factors:
        prod_ *= abs(a)
    assert total == prod_
    assert rep.lim_rank == 1
