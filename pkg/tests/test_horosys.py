from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import rank_q
from treecoh.errors import ConsistencyError, InputError, TruncationDepthError
from treecoh.exactalg import Submodule
from treecoh.horosys import (
    BranchSwap,
    SigmaFamily,
    YSystem,
    ZeroChainChecker,
    admissible_m,
    count_sigma_families,
    default_m_values,
    division_check,
    division_witness,
    fiber_kernel_check,
    iter_sigma_families,
    multiples_spanning_set,
    sample_sigma_families,
    validate_family,
    window_lim_check,
    y_submodule,
    zero_chain_identity,
    zero_chain_sweep,
)
from treecoh.prodcomplex import HoroballSpec, MultiComplement, ProductComplex, Sublevel
from treecoh.treegeo import RayEnd, build_regular, distinguished_end


def pc_regular(q, N, d):
    t = build_regular(q, N)
    return ProductComplex([t] * d)


def leaves_under(t, e, N):
    return [v for v in t.ec_set(N) if t.is_below(v, e)]


def oracle_rank(pc, m, N):
    """rank of span{⊗ indicator(leaves under e_i)} over interior top cells with Σ heights >= m."""
    leaves = [pc.factors[i].ec_set(N) for i in range(pc.d)]
    pos = [{v: k for k, v in enumerate(L)} for L in leaves]
    edges = [[c >> 1 for c in pc.factor_codes(i, N, True) if c & 1] for i in range(pc.d)]
    cols = []
    for cell in product(*edges):
        if sum(pc.factors[i].height(e) for i, e in enumerate(cell)) < m:
            continue
        vec = [0] * (len(leaves[0]) ** pc.d)
        for tup in product(*[leaves_under(pc.factors[i], e, N) for i, e in enumerate(cell)]):
            idx = 0
            for i, v in enumerate(tup):
                idx = idx * len(leaves[i]) + pos[i][v]
            vec[idx] = 1
        cols.append(vec)
    return rank_q(cols) if cols else 0


# --- S_m -------------------------------------------------------------------------

@pytest.mark.parametrize("d,q,N", [(1, 2, 3), (1, 3, 2), (2, 2, 2)])
def test_s_rank_matches_indicator_oracle(d, q, N):
    pc = pc_regular(q, N, d)
    for m in default_m_values(pc, N):
        assert y_submodule(pc, m, N).rank == oracle_rank(pc, m, N)


@pytest.mark.parametrize("d,q,N", [(1, 2, 3), (2, 2, 2), (2, 3, 2), (2, 2, 3)])
def test_derivations_agree_nested_and_pure(d, q, N):
    pc = pc_regular(q, N, d)
    sys = YSystem(pc, N).compute(default_m_values(pc, N))
    assert all(s.agree for s in sys.members.values())
    assert all(sys.nested().values())
    assert all(sys.purity().values())


def test_known_ranks_d2_q2_n3():
    pc = pc_regular(2, 3, 2)
    sys = YSystem(pc, 3).compute(range(5))
    assert [sys.members[m].rank for m in range(5)] == [192, 80, 32, 12, 4]


def test_unknown_derivation_and_depth():
    pc = pc_regular(2, 2, 2)
    with pytest.raises(InputError):
        y_submodule(pc, 0, 2, derivation="other")
    with pytest.raises(TruncationDepthError):
        y_submodule(pc, 0, 3)


def test_window_intersection_vanishes():
    pc = pc_regular(2, 3, 2)
    sys = YSystem(pc, 3).compute(default_m_values(pc, 3))
    rep = window_lim_check(sys)
    assert rep.ok and rep.witness is None
    assert rep.pairs[(0, 1)] is None and rep.pairs[(0, 3)] is True


def test_window_check_flags_small_m_as_not_applicable():
    pc = pc_regular(2, 2, 2)
    sys = YSystem(pc, 2).compute([0])
    rep = window_lim_check(sys, [(0, 0), (1, 0)])
    assert all(v is None for v in rep.pairs.values()) and not rep.ok


# --- division witnesses -----------------------------------------------------------

@pytest.mark.parametrize("r", [2, 3])
def test_division_witnesses_exist(r):
    pc = pc_regular(2, 3, 2)
    for m in (1, 3):
        rep = division_check(y_submodule(pc, m, 3).module, m, r)
        assert rep.ok and rep.spanning > 0


def test_division_witness_fails_on_impure_module():
    S = Submodule.span(2, [{0: 2}])
    with pytest.raises(ConsistencyError):
        division_witness(S, 2, {0: 2})
    assert not division_check(S, 0, 2).ok


def test_division_witness_rejects_non_multiple():
    S = Submodule.span(2, [{0: 1}])
    with pytest.raises(InputError):
        division_witness(S, 2, {0: 3})
    assert division_witness(S, 3, {0: 3}) == {0: 1}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=1, max_size=3),
       st.sampled_from([2, 3, 5]))
def test_spanning_set_lies_in_module_and_multiples(gens, r):
    S = Submodule.span(3, [{i: x for i, x in enumerate(g) if x} for g in gens])
    for v in multiples_spanning_set(S, r):
        assert all(x % r == 0 for x in v.values())
        assert S.contains_module(Submodule.span(3, [v]))


# --- zero-chain identity -----------------------------------------------------------

def test_family_counts():
    pc = pc_regular(2, 3, 2)
    assert count_sigma_families(pc, 0, 3) == sum(1 for _ in iter_sigma_families(pc, 0, 3)) == 4096
    assert admissible_m(pc, 0, 3) == [3, 4]
    assert admissible_m(pc, 1, 3) == []


def test_zero_chain_sweep_exhaustive_small():
    pc = pc_regular(2, 3, 2)
    rep = zero_chain_sweep(pc)
    assert rep.ok and rep.families == 4096 and rep.checks == 8192


def test_zero_chain_sampled_three_factors():
    pc = pc_regular(2, 3, 3)
    rep = zero_chain_sweep(pc, sample=20, seed=3)
    assert rep.ok and rep.families == 20


def test_zero_chain_fails_below_the_window():
    pc = pc_regular(2, 3, 2)
    fam = next(iter_sigma_families(pc, 0, 3))
    chk = ZeroChainChecker(pc, 0, 3)
    bad = chk.check(fam, 0, swaps=False)
    assert not bad.ok and bad.residue
    assert zero_chain_identity(pc, fam, 3)
    with pytest.raises(InputError):
        zero_chain_identity(pc, fam, 0)


def test_family_validation():
    pc = pc_regular(2, 3, 2)
    fam = next(iter_sigma_families(pc, 0, 3))
    validate_family(pc, fam)
    with pytest.raises(InputError):
        validate_family(pc, SigmaFamily(0, 3, fam.v, fam.w, fam.w))
    assert SigmaFamily.from_json_obj(fam.to_json_obj()) == fam


def test_sampling_is_seeded():
    pc = pc_regular(2, 3, 2)
    assert sample_sigma_families(pc, 0, 3, 5, seed=1) == sample_sigma_families(pc, 0, 3, 5, seed=1)


def test_branch_swap_properties():
    t = build_regular(2, 3)
    pc = ProductComplex([t, t])
    fam = next(iter_sigma_families(pc, 0, 3))
    u = BranchSwap(t, 0, fam.w[0], fam.e[0], 0)
    assert u.verify(fam.w[0], fam.e[0])
    for v in t.vertices():
        assert u(u(v)) == v and t.height(u(v)) == t.height(v)
        if t.height(v) >= 1:
            assert u(v) == v


def test_branch_swap_rejects_mismatched_heights():
    t = build_regular(2, 3)
    with pytest.raises(InputError):
        BranchSwap(t, 0, t.x(0), t.children(t.x(0))[0], 0)


# --- fiber kernel ------------------------------------------------------------------

def _specs(pc):
    xi = tuple(distinguished_end(t) for t in pc.factors)
    down = tuple(RayEnd(t.x(0), "lowest") for t in pc.factors)
    return [HoroballSpec(xi, 1), HoroballSpec(down, 1)]


@pytest.mark.parametrize("w", [0, 1])
def test_fiber_kernel_trivial(w):
    pc = pc_regular(2, 3, 2)
    rep = fiber_kernel_check(pc, w, MultiComplement(_specs(pc)))
    assert rep.applicable and rep.ok and rep.columns > 0


def test_fiber_kernel_not_applicable_without_horoballs():
    pc = pc_regular(2, 2, 2)
    rep = fiber_kernel_check(pc, 0, Sublevel(0))
    assert not rep.applicable and rep.ok
