"""Compactly supported cohomology through truncation pairs.

The stage-n cochain complex of a region A is the relative complex
(A ∩ K_n, A ∩ ∂K_n), where ∂K_n is the union of cells with a coordinate on
the frontier {x_{i,n}} ∪ EC_{i,n} of its factor.  Its cells are exactly the
"interior" cells of K_n lying in A, and extension by zero from stage n to
stage n' > n is a cochain map, so these groups form the colimit system for
H_c^*(A).

Two strategies compute a stage:

* ``direct``: cochains on the interior cells of A.
* ``complement``: cochains on the interior cells D of K_n outside A.  The
  short exact sequence 0 -> C(D) -> C(K_n) -> C(A) -> 0 together with the
  corner model H^*(K_n, ∂K_n) = R^{Λ_n} (concentrated in degree d) gives
  H^k(A) = H^{k+1}(D) for k <= d-2, H^{d-1}(A) = ker E / im δ_D and
  H^d(A) = coker E, with E the evaluation map on top cells of D.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ConsistencyError, InputError, TruncationDepthError
from .exactalg import (
    ZZ,
    CoefficientRing,
    ModuleDescriptor,
    SparseIntMatrix,
    Submodule,
    _ring_smith,
    cohomology_at,
    cohomology_basis,
    induced_map,
    kernel_basis,
    smith,
)
from .prodcomplex import Cell, ProductComplex, Region, Whole, cell_dim

DIRECT_BUDGET = 300_000


# ---------------------------------------------------------------------------
# graded descriptors
# ---------------------------------------------------------------------------


@dataclass
class GradedDescriptor:
    d: int
    degrees: Dict[int, ModuleDescriptor] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for k in self.degrees:
            if not 0 <= k <= self.d:
                raise InputError(f"degree {k} outside [0, {self.d}]")

    def __getitem__(self, k: int) -> ModuleDescriptor:
        return self.degrees.get(k, ModuleDescriptor())

    @property
    def is_zero(self) -> bool:
        return all(m.is_zero for m in self.degrees.values())

    def concentrated_in(self, k: int) -> bool:
        return all(m.is_zero for j, m in self.degrees.items() if j != k)

    def to_json_obj(self) -> dict:
        return {str(k): m.to_json_obj() for k, m in sorted(self.degrees.items())}

    def __str__(self) -> str:
        return ", ".join(f"H^{k}={m}" for k, m in sorted(self.degrees.items()))


# ---------------------------------------------------------------------------
# rank helpers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _RankInfo:
    rank: int
    torsion_free: bool
    divisors: Tuple[int, ...]


def _rank_info(A: SparseIntMatrix, ring: CoefficientRing) -> _RankInfo:
    if A.nnz == 0:
        return _RankInfo(0, True, ())
    s = _ring_smith(A, ring)
    divs = tuple(s.divisors)
    return _RankInfo(s.rank, all(ring.clean_factor(x) == 1 for x in divs), divs)


# ---------------------------------------------------------------------------
# truncation pairs
# ---------------------------------------------------------------------------


class TruncationPair:
    """Relative cochain complex of (A ∩ K_n, A ∩ ∂K_n), or of its complement in K_n."""

    def __init__(self, pc: ProductComplex, region: Region, n: int, complement: bool = False):
        _check_stage(pc, n)
        self.pc = pc
        self.region = region
        self.n = n
        self.complement = complement
        buckets: List[List[Cell]] = [[] for _ in range(pc.d + 1)]
        source = pc.iter_outside(region, n, True) if complement else pc.iter_cells(region, n, True)
        for c in source:
            buckets[cell_dim(c)].append(c)
        for b in buckets:
            b.sort()
        self.cells = buckets
        self._delta: Dict[int, SparseIntMatrix] = {}
        self._index: Dict[int, Dict[Cell, int]] = {}

    @property
    def d(self) -> int:
        return self.pc.d

    def size(self, k: int) -> int:
        return len(self.cells[k]) if 0 <= k <= self.d else 0

    def index(self, k: int) -> Dict[Cell, int]:
        if k not in self._index:
            self._index[k] = {c: i for i, c in enumerate(self.cells[k])}
        return self._index[k]

    def delta(self, k: int) -> SparseIntMatrix:
        """δ^k: C^k -> C^{k+1} (rows are (k+1)-cells)."""
        if k not in self._delta:
            if 0 <= k < self.d:
                self._delta[k] = self.pc.coboundary_between(self.cells[k], self.cells[k + 1])
            else:
                self._delta[k] = SparseIntMatrix.zero(self.size(k + 1), self.size(k))
        return self._delta[k]

    def extension(self, other: "TruncationPair", k: int) -> SparseIntMatrix:
        """Extension by zero C^k(self) -> C^k(other) for a later stage."""
        idx = other.index(k)
        ent = {}
        for j, c in enumerate(self.cells[k]):
            i = idx.get(c)
            if i is None:
                raise InputError("extension needs nested stages")
            ent[(i, j)] = 1
        return SparseIntMatrix(other.size(k), self.size(k), ent)

    def cohomology(self, ring: CoefficientRing = ZZ) -> GradedDescriptor:
        infos = [_rank_info(self.delta(k), ring) for k in range(self.d)]
        out = {}
        for k in range(self.d + 1):
            r_out = infos[k].rank if k < self.d else 0
            r_in = infos[k - 1] if k >= 1 else _RankInfo(0, True, ())
            free = self.size(k) - r_out - r_in.rank
            out[k] = ModuleDescriptor.from_divisors(free, r_in.divisors, ring)
        return GradedDescriptor(self.d, out)


def _check_stage(pc: ProductComplex, n: int) -> None:
    if n < 0:
        raise InputError(f"stage {n} must be non-negative")
    if n > pc.N:
        raise TruncationDepthError(f"stage {n} exceeds truncation depth {pc.N}; deepen truncation")


@lru_cache(maxsize=24)
def truncation_pair(pc: ProductComplex, region: Region, n: int, complement: bool = False) -> TruncationPair:
    return TruncationPair(pc, region, n, complement)


# ---------------------------------------------------------------------------
# corner model
# ---------------------------------------------------------------------------


class CornerModel:
    """R^{Λ_n} with Λ_n = ∏ EC_{i,n}, evaluation on corner cubes and the transitions f.

    Each EC_{i,n} is listed in depth-first order, so descendant sets are
    intervals.  ``difference`` coordinates apply, per factor, the unimodular
    map sending the indicator of [a, b) to e_a - e_b (e_L dropped); both the
    evaluation columns and the transitions then have at most 2^d entries.
    """

    def __init__(self, pc: ProductComplex, n: int):
        _check_stage(pc, n)
        self.pc = pc
        self.n = n
        self.leaves = [t.ec_set(n) for t in pc.factors]
        self.pos = [{v: k for k, v in enumerate(l)} for l in self.leaves]
        self.sizes = [len(l) for l in self.leaves]
        self.strides = [1] * pc.d
        for i in range(pc.d - 2, -1, -1):
            self.strides[i] = self.strides[i + 1] * self.sizes[i + 1]
        self.size = self.strides[0] * self.sizes[0]
        self._intervals: List[Dict[int, Tuple[int, int]]] = []
        for i, t in enumerate(pc.factors):
            iv: Dict[int, Tuple[int, int]] = {}
            for k, v in enumerate(self.leaves[i]):
                u = v
                while True:
                    a, b = iv.get(u, (k, k + 1))
                    iv[u] = (min(a, k), max(b, k + 1))
                    if u == t.x(n):
                        break
                    u = t.parent(u)
            self._intervals.append(iv)

    def index(self, vertex: Sequence[int]) -> int:
        return sum(self.pos[i][v] * self.strides[i] for i, v in enumerate(vertex))

    def tuple_at(self, idx: int) -> Tuple[int, ...]:
        out = []
        for i in range(self.pc.d):
            k, idx = divmod(idx, self.strides[i])
            out.append(self.leaves[i][k])
        return tuple(out)

    def interval(self, i: int, u: int) -> Tuple[int, int]:
        """Positions of the EC_{i,n} vertices below u."""
        return self._intervals[i].get(u, (0, 0))

    def corner_cube(self, vertex: Sequence[int]) -> List[Cell]:
        """Top cells of F_v = ∏ [x_{i,n}, v(i)]."""
        paths = []
        for i, v in enumerate(vertex):
            t = self.pc.factors[i]
            edges = []
            u = v
            while u != t.x(self.n):
                edges.append(2 * u + 1)
                u = t.parent(u)
            paths.append(edges)
        return [tuple(c) for c in product(*paths)]

    def _factor_vector(self, i: int, a: int, b: int, coords: str) -> Dict[int, int]:
        if coords == "standard":
            return {k: 1 for k in range(a, b)}
        if a == b:
            return {}
        out = {a: 1}
        if b < self.sizes[i]:
            out[b] = -1
        return out

    def _tensor(self, parts: List[Dict[int, int]]) -> Dict[int, int]:
        acc = {0: 1}
        for i, part in enumerate(parts):
            s = self.strides[i]
            acc = {x + k * s: v * w for x, v in acc.items() for k, w in part.items()}
        return acc

    def ev_column(self, cell: Cell, coords: str = "difference") -> Dict[int, int]:
        """(φ ↦ (φ(F_v))_v) applied to the indicator cochain of a top cell."""
        if cell_dim(cell) != self.pc.d:
            raise InputError("evaluation is defined on top cells")
        parts = []
        for i, c in enumerate(cell):
            a, b = self.interval(i, c >> 1)
            parts.append(self._factor_vector(i, a, b, coords))
        return self._tensor(parts)

    def ev_matrix(self, cells: Sequence[Cell], coords: str = "difference") -> SparseIntMatrix:
        cols = [self.ev_column(c, coords) for c in cells]
        return SparseIntMatrix.from_columns(self.size, cols)

    def _factor_transition(self, later: "CornerModel", i: int, a: int, b: int) -> Tuple[int, int]:
        """Image under f of the indicator [a, b) of EC_{i,n}, as an interval of EC_{i,n'}."""
        if a == b:
            return (0, 0)
        lo = later.interval(i, self.leaves[i][a])[0]
        hi = later.interval(i, self.leaves[i][b - 1])[1]
        return lo, hi

    def transition(self, later: "CornerModel", coords: str = "difference") -> SparseIntMatrix:
        """f_{n->n'}: R^{Λ_n} -> R^{Λ_n'}, f(α)(w) = α(g(w)) with g the ascent to height -n."""
        if later.n < self.n or later.pc is not self.pc:
            raise InputError("transition needs a later stage of the same complex")
        per = []
        for i in range(self.pc.d):
            cols = []
            L = self.sizes[i]
            for a in range(L):
                # standard basis vector e_a, or the suffix [a, L) it represents in difference coordinates
                b = a + 1 if coords == "standard" else L
                A, B = self._factor_transition(later, i, a, b)
                cols.append(later._factor_vector(i, A, B, coords))
            per.append(cols)
        out = []
        for idx in range(self.size):
            parts = []
            rem = idx
            for i in range(self.pc.d):
                k, rem = divmod(rem, self.strides[i])
                parts.append(per[i][k])
            out.append(later._tensor(parts))
        return SparseIntMatrix.from_columns(later.size, out)

    def factor_transition_matrix(self, later: "CornerModel", i: int) -> SparseIntMatrix:
        cols = []
        for a in range(self.sizes[i]):
            A, B = self._factor_transition(later, i, a, a + 1)
            cols.append({k: 1 for k in range(A, B)})
        return SparseIntMatrix.from_columns(later.sizes[i], cols)


@lru_cache(maxsize=16)
def corner_model(pc: ProductComplex, n: int) -> CornerModel:
    return CornerModel(pc, n)


# ---------------------------------------------------------------------------
# relative cohomology
# ---------------------------------------------------------------------------


_LOWER_KINDS = ("sublevel", "strict_sublevel", "multi")


def choose_strategy(pc: ProductComplex, region: Region, n: int, strategy: str = "auto") -> str:
    if strategy in ("direct", "complement"):
        return strategy
    if strategy != "auto":
        raise InputError(f"unknown strategy {strategy!r}")
    if region.kind not in _LOWER_KINDS:
        return "direct"
    counts = pc.count_by_dim(region, n, True)
    if counts is not None and sum(counts) <= DIRECT_BUDGET:
        return "direct"
    return "complement"


def _complement_cohomology(pc: ProductComplex, region: Region, n: int, ring: CoefficientRing) -> GradedDescriptor:
    D = truncation_pair(pc, region, n, True)
    E = corner_model(pc, n).ev_matrix(D.cells[pc.d])
    d = pc.d
    infos = {k: _rank_info(D.delta(k), ring) for k in range(d)}
    e_info = _rank_info(E, ring)
    out = {}
    for k in range(d - 1):
        j = k + 1
        r_out = infos[j].rank if j < d else 0
        free = D.size(j) - r_out - infos[j - 1].rank
        out[k] = ModuleDescriptor.from_divisors(free, infos[j - 1].divisors, ring)
    top_in = infos[d - 1] if d >= 1 else _RankInfo(0, True, ())
    free = D.size(d) - e_info.rank - top_in.rank
    out[d - 1] = ModuleDescriptor.from_divisors(free, top_in.divisors, ring)
    out[d] = ModuleDescriptor.from_divisors(corner_model(pc, n).size - e_info.rank, e_info.divisors, ring)
    return GradedDescriptor(d, out)


def relative_cohomology(pc: ProductComplex, region: Region, n: int, ring: CoefficientRing = ZZ,
                        strategy: str = "auto") -> GradedDescriptor:
    """H^*(A ∩ K_n, A ∩ ∂K_n) in every degree."""
    _check_stage(pc, n)
    how = choose_strategy(pc, region, n, strategy)
    if how == "direct":
        return truncation_pair(pc, region, n).cohomology(ring)
    return _complement_cohomology(pc, region, n, ring)


@lru_cache(maxsize=16)
def _basis(pc: ProductComplex, region: Region, n: int, k: int, ring: CoefficientRing):
    P = truncation_pair(pc, region, n)
    return cohomology_basis(P.delta(k - 1), P.delta(k), ring)


def colimit_map(pc: ProductComplex, region: Region, n: int, n2: int, k: int,
                ring: CoefficientRing = ZZ) -> SparseIntMatrix:
    """Matrix of H^k(stage n) -> H^k(stage n2) on the stored basis lifts."""
    if n2 < n:
        raise InputError("colimit maps run from earlier to later stages")
    _check_stage(pc, n2)
    src = _basis(pc, region, n, k, ring)
    if n == n2:
        return SparseIntMatrix.identity(src.dim)
    dst = _basis(pc, region, n2, k, ring)
    ext = truncation_pair(pc, region, n).extension(truncation_pair(pc, region, n2), k)
    return induced_map(src, dst, ext, ring)


def corner_block_cohomology(pc: ProductComplex, m: int, r, ring: CoefficientRing = ZZ) -> GradedDescriptor:
    """H^*(C(m), ∂↑C(m)): cochains on corner cells vanishing on cells that touch some x_{i,m}."""
    from .prodcomplex import CornerBlock, CornerTop

    block = CornerBlock(m, r)
    top = CornerTop(m, r)
    buckets: List[List[Cell]] = [[] for _ in range(pc.d + 1)]
    for c in pc.iter_cells(block):
        if not pc.contains(top, c):
            buckets[cell_dim(c)].append(c)
    for b in buckets:
        b.sort()
    infos = [_rank_info(pc.coboundary_between(buckets[k], buckets[k + 1]), ring) for k in range(pc.d)]
    out = {}
    for k in range(pc.d + 1):
        r_out = infos[k].rank if k < pc.d else 0
        r_in = infos[k - 1] if k >= 1 else _RankInfo(0, True, ())
        out[k] = ModuleDescriptor.from_divisors(len(buckets[k]) - r_out - r_in.rank, r_in.divisors, ring)
    return GradedDescriptor(pc.d, out)


def corner_depth(d: int, m: int, r) -> int:
    """Truncation depth needed for the corner block C(m) at height r (unit weights)."""
    from fractions import Fraction

    low = Fraction(r) - (d - 1) * m
    return max(m, -((low.numerator) // low.denominator), 1)


# ---------------------------------------------------------------------------
# eventual death
# ---------------------------------------------------------------------------


@dataclass
class DeathReport:
    region: str
    degree: int
    window: int
    strategy: str
    image_ranks: Dict[int, int]
    exact: Dict[int, bool]
    witness: Optional[dict] = None

    @property
    def ok(self) -> bool:
        """Every admissible stage class dies within the window."""
        return all(r == 0 for r in self.image_ranks.values()) and all(self.exact.values())

    @property
    def persists(self) -> bool:
        return any(r > 0 for r in self.image_ranks.values())

    def to_json_obj(self) -> dict:
        return {
            "region": self.region,
            "degree": self.degree,
            "window": self.window,
            "strategy": self.strategy,
            "image_ranks": {str(k): v for k, v in self.image_ranks.items()},
            "ok": self.ok,
            "persists": self.persists,
            "witness": self.witness,
        }


def _slice_rank(Z_rank: int, later_in: SparseIntMatrix, outside_rows: List[int], ring: CoefficientRing):
    """rank of Z_n minus rank of (B' ∩ C_n), with B' = im(later_in)."""
    full = _rank_info(later_in, ring)
    out = _rank_info(later_in.select(rows=outside_rows), ring) if outside_rows else _RankInfo(0, True, ())
    return Z_rank - (full.rank - out.rank), full.torsion_free


def _membership_zero(cocycles: List[Dict[int, int]], to_later: Dict[int, int], later_in: SparseIntMatrix,
                     ring: CoefficientRing) -> Optional[Dict[int, int]]:
    """First cocycle whose extension is not a coboundary at the later stage, if any."""
    B = Submodule(later_in.rows, later_in, ring)
    for z in cocycles:
        img = {to_later[i]: v for i, v in z.items()}
        if not B.contains(img):
            return z
    return None


def _image_direct(pc, region, k, n, n2, ring):
    P, Q = truncation_pair(pc, region, n), truncation_pair(pc, region, n2)
    Z_rank = P.size(k) - _rank_info(P.delta(k), ring).rank
    idx = set(P.cells[k])
    outside = [i for i, c in enumerate(Q.cells[k]) if c not in idx]
    img, tf = _slice_rank(Z_rank, Q.delta(k - 1), outside, ring)
    exact = True
    witness = None
    if img == 0 and not tf:
        qi = Q.index(k)
        to_later = {j: qi[c] for j, c in enumerate(P.cells[k])}
        bad = _membership_zero(kernel_basis(P.delta(k), ring), to_later, Q.delta(k - 1), ring)
        if bad is not None:
            exact = False
            witness = {"cocycle": {str(P.cells[k][i]): v for i, v in bad.items()}}
    return img, exact, witness


def _image_complement(pc, region, k, n, n2, ring):
    d = pc.d
    P, Q = truncation_pair(pc, region, n, True), truncation_pair(pc, region, n2, True)
    if k <= d - 2:
        j = k + 1
        Z_rank = P.size(j) - _rank_info(P.delta(j), ring).rank
        idx = set(P.cells[j])
        outside = [i for i, c in enumerate(Q.cells[j]) if c not in idx]
        img, tf = _slice_rank(Z_rank, Q.delta(j - 1), outside, ring)
        exact = tf or img > 0
        if not exact:
            qi = Q.index(j)
            to_later = {a: qi[c] for a, c in enumerate(P.cells[j])}
            exact = _membership_zero(kernel_basis(P.delta(j), ring), to_later, Q.delta(j - 1), ring) is None
        return img, exact, None
    M, M2 = corner_model(pc, n), corner_model(pc, n2)
    if k == d - 1:
        E = M.ev_matrix(P.cells[d])
        Z_rank = P.size(d) - _rank_info(E, ring).rank
        idx = set(P.cells[d])
        outside = [i for i, c in enumerate(Q.cells[d]) if c not in idx]
        img, tf = _slice_rank(Z_rank, Q.delta(d - 1), outside, ring)
        exact = tf or img > 0
        if not exact:
            qi = Q.index(d)
            to_later = {a: qi[c] for a, c in enumerate(P.cells[d])}
            exact = _membership_zero(kernel_basis(E, ring), to_later, Q.delta(d - 1), ring) is None
        return img, exact, None
    E2 = M2.ev_matrix(Q.cells[d])
    F = M.transition(M2)
    base = _rank_info(E2, ring)
    img = _rank_info(E2.hstack(F), ring).rank - base.rank
    exact = base.torsion_free or img > 0
    if not exact:
        B = Submodule(E2.rows, E2, ring)
        exact = all(B.contains(col) for col in F.column_dicts())
    return img, exact, None


def stage_image(pc: ProductComplex, region: Region, k: int, n: int, n2: int, ring: CoefficientRing = ZZ,
                strategy: str = "auto") -> Tuple[int, bool, Optional[dict]]:
    """(rank of the image of H^k(n) -> H^k(n2), whether a zero image is exact over ring, witness)."""
    _check_stage(pc, n2)
    if not 0 <= k <= pc.d:
        return 0, True, None
    how = choose_strategy(pc, region, n2, strategy)
    if how == "direct":
        return _image_direct(pc, region, k, n, n2, ring)
    return _image_complement(pc, region, k, n, n2, ring)


def eventual_death_check(pc: ProductComplex, region: Region, k: int, window: int, ring: CoefficientRing = ZZ,
                         strategy: str = "auto", stages: Optional[Sequence[int]] = None) -> DeathReport:
    """Whether H^k(stage n) -> H^k(stage n + window) vanishes for every admissible n."""
    if window < 1:
        raise InputError("window must be at least 1")
    if stages is None:
        stages = range(0, pc.N - window + 1)
    stages = list(stages)
    if not stages or max(stages) + window > pc.N:
        raise TruncationDepthError(f"window {window} does not fit depth {pc.N}; deepen truncation")
    ranks, exact = {}, {}
    witness = None
    how = choose_strategy(pc, region, max(stages) + window, strategy)
    for n in stages:
        img, ex, wit = stage_image(pc, region, k, n, n + window, ring, how)
        ranks[n] = img
        exact[n] = ex
        if witness is None and (img > 0 or not ex):
            witness = {"stage": n, "target": n + window, "image_rank": img}
            if wit:
                witness.update(wit)
    return DeathReport(region.label(), k, window, how, ranks, exact, witness)


# ---------------------------------------------------------------------------
# corner crosscheck
# ---------------------------------------------------------------------------


@dataclass
class CornerReport:
    n: int
    strategy: str
    lam_size: int
    checks: Dict[str, bool]
    detail: Dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json_obj(self) -> dict:
        return {"n": self.n, "strategy": self.strategy, "lam_size": self.lam_size, "ok": self.ok,
                "checks": dict(self.checks), "detail": self.detail}


def _intertwines(M: CornerModel, M2: CornerModel, cells: Sequence[Cell]) -> bool:
    """E_{n'}(c) = f(E_n(c)) for every top cell c of stage n, compared factor by factor."""
    for c in cells:
        for i, code in enumerate(c):
            a, b = M.interval(i, code >> 1)
            lhs = M2.interval(i, code >> 1)
            rhs = M._factor_transition(M2, i, a, b)
            if lhs != rhs:
                return False
    return True


def _transition_checks(M: CornerModel, M2: CornerModel, F: SparseIntMatrix) -> Dict[str, bool]:
    s = smith(F)
    q_pre = all(len(col) == _preimage_count(M, M2) for col in F.column_dicts())
    return {
        "f_injective": s.rank == F.cols,
        "f_unit_divisors": all(abs(x) == 1 for x in s.divisors),
        "f_preimage_count": q_pre,
    }


def _preimage_count(M: CornerModel, M2: CornerModel) -> int:
    out = 1
    for i, t in enumerate(M.pc.factors):
        v = M.leaves[i][0]
        out *= len(t.descendants_at(v, -M2.n))
    return out


def _direct_crosscheck(pc: ProductComplex, n: int, ring: CoefficientRing) -> CornerReport:
    d = pc.d
    P = truncation_pair(pc, Whole(), n)
    M = corner_model(pc, n)
    H = P.cohomology(ring)
    E = M.ev_matrix(P.cells[d])
    dtop = P.delta(d - 1)
    checks = {
        "lower_degrees_vanish": all(H[k].is_zero for k in range(d)),
        "top_rank_is_lambda": H[d] == ModuleDescriptor(M.size),
        "ev_kills_coboundaries": (E @ dtop).is_zero(),
        "ev_injective": cohomology_at(dtop, E, ring, check=False).is_zero,
        "ev_surjective": cohomology_at(E, SparseIntMatrix.zero(0, M.size), ring, check=False).is_zero,
    }
    detail: Dict[str, object] = {"cells": [P.size(k) for k in range(d + 1)]}
    if n + 1 <= pc.N:
        M2 = corner_model(pc, n + 1)
        checks["intertwines"] = _intertwines(M, M2, P.cells[d])
        checks.update(_transition_checks(M, M2, M.transition(M2, "standard")))
        detail["preimages_per_tuple"] = _preimage_count(M, M2)
    return CornerReport(n, "direct", M.size, checks, detail)


def _factored_crosscheck(pc: ProductComplex, n: int, ring: CoefficientRing, samples: int, seed: int) -> CornerReport:
    """Per-factor crosschecks plus sampled checks that the product data are tensor products."""
    d = pc.d
    checks: Dict[str, bool] = {}
    M = corner_model(pc, n)
    M2 = corner_model(pc, n + 1) if n + 1 <= pc.N else None
    for i, t in enumerate(pc.factors):
        sub = ProductComplex([t], [pc.weights[i]])
        rep = _direct_crosscheck(sub, n, ring)
        for key, val in rep.checks.items():
            checks[f"factor{i}_{key}"] = val
    rng = random.Random(seed)
    lists = [pc.factor_codes(i, n, True) for i in range(d)]
    edges = [[c for c in l if c & 1] for l in lists]
    singles = [corner_model(ProductComplex([t], [pc.weights[i]]), n) for i, t in enumerate(pc.factors)]
    koszul = ev_tensor = f_tensor = True
    for _ in range(samples):
        cell = tuple(rng.choice(l) for l in lists)
        expect = {}
        m = 0
        for i, c in enumerate(cell):
            if c & 1:
                t = pc.factors[i]
                sign = -1 if m % 2 else 1
                expect[cell[:i] + (2 * t.parent(c >> 1),) + cell[i + 1:]] = sign
                expect[cell[:i] + (2 * (c >> 1),) + cell[i + 1:]] = -sign
                m += 1
        if dict((f, s) for s, f in pc.faces(cell)) != expect:
            koszul = False
        top = tuple(rng.choice(l) for l in edges)
        parts = [singles[i].ev_column((c,)) for i, c in enumerate(top)]
        if M.ev_column(top) != M._tensor(parts):
            ev_tensor = False
        if M2 is not None:
            idx = rng.randrange(M.size)
            v = M.tuple_at(idx)
            brute = {}
            for w in product(*[t.descendants_at(x, -(n + 1)) for t, x in zip(pc.factors, v)]):
                brute[M2.index(w)] = 1
            parts = []
            for i, x in enumerate(v):
                k = M.pos[i][x]
                A, B = singles[i]._factor_transition(corner_model(singles[i].pc, n + 1), 0, k, k + 1)
                parts.append(M2._factor_vector(i, A, B, "standard"))
            if M2._tensor(parts) != brute:
                f_tensor = False
    checks["koszul_signs_sampled"] = koszul
    checks["ev_is_tensor_sampled"] = ev_tensor
    if M2 is not None:
        checks["f_is_tensor_sampled"] = f_tensor
    return CornerReport(n, "factored", M.size, checks, {"samples": samples})


def corner_crosscheck(pc: ProductComplex, n: int, ring: CoefficientRing = ZZ, strategy: str = "auto",
                      samples: int = 500, seed: int = 0) -> CornerReport:
    """Verify that evaluation on corner cubes is an isomorphism intertwining the stage maps with f."""
    _check_stage(pc, n)
    if n < 1:
        raise InputError("the corner model needs a stage n >= 1")
    if strategy == "auto":
        total = 1
        for i in range(pc.d):
            total *= len(pc.factor_codes(i, n, True))
        strategy = "direct" if total <= DIRECT_BUDGET else "factored"
    if strategy == "direct":
        return _direct_crosscheck(pc, n, ring)
    if strategy == "factored":
        return _factored_crosscheck(pc, n, ring, samples, seed)
    raise InputError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Mayer-Vietoris
# ---------------------------------------------------------------------------


@dataclass
class MVReport:
    n: int
    N: int
    horoball_degrees: Dict[int, bool]
    sublevel_top_minus_one: bool
    s_rank: int
    derivations_agree: bool

    @property
    def ok(self) -> bool:
        return all(self.horoball_degrees.values()) and self.sublevel_top_minus_one and self.derivations_agree

    def to_json_obj(self) -> dict:
        return {"n": self.n, "N": self.N, "horoball_degrees": {str(k): v for k, v in self.horoball_degrees.items()},
                "sublevel_top_minus_one": self.sublevel_top_minus_one, "s_rank": self.s_rank,
                "derivations_agree": self.derivations_agree, "ok": self.ok}


def mv_verify(pc: ProductComplex, n: int, N: Optional[int] = None, ring: CoefficientRing = ZZ,
              window: int = 2) -> MVReport:
    """Vanishing inputs of the sequence for X = X_n ∪ B_n and agreement of the two S_n computations."""
    from . import horosys
    from .prodcomplex import Sublevel, Superlevel

    N = pc.N if N is None else N
    if not n < N <= pc.N:
        raise TruncationDepthError(f"need n < N <= depth, got n={n}, N={N}, depth={pc.N}")
    d = pc.d
    horo = {k: eventual_death_check(pc, Superlevel(n), k, window, ring).ok for k in range(d + 1)}
    sub = eventual_death_check(pc, Sublevel(n), d - 1, window, ring).ok
    ys = horosys.y_submodule(pc, n, N, derivation="both")
    return MVReport(n, N, horo, sub, ys.rank, ys.agree)


# ---------------------------------------------------------------------------
# towers and lim / lim^1 windows
# ---------------------------------------------------------------------------


@dataclass
class TowerWindow:
    """Free modules M_start, ..., M_end with maps M_{j+1} -> M_j.

    ``maps[j]`` has rows indexed by M_{start+j} and columns by M_{start+j+1}.
    """

    start: int
    ranks: List[int]
    maps: List[SparseIntMatrix]
    ring: CoefficientRing = ZZ

    def __post_init__(self) -> None:
        if len(self.maps) != len(self.ranks) - 1:
            raise InputError("a window of m modules needs m-1 maps")
        for j, f in enumerate(self.maps):
            if f.shape != (self.ranks[j], self.ranks[j + 1]):
                raise InputError(f"map {j} has shape {f.shape}, expected {(self.ranks[j], self.ranks[j + 1])}")

    @classmethod
    def from_descriptors(cls, start: int, descriptors: Sequence[ModuleDescriptor], maps: Sequence[SparseIntMatrix],
                         ring: CoefficientRing = ZZ) -> "TowerWindow":
        if any(m.invariant_factors for m in descriptors):
            raise InputError("tower windows take free modules only")
        return cls(start, [m.free_rank for m in descriptors], list(maps), ring)

    @classmethod
    def constant(cls, rank: int, length: int, matrix: SparseIntMatrix, ring: CoefficientRing = ZZ) -> "TowerWindow":
        return cls(0, [rank] * length, [matrix] * (length - 1), ring)

    def delta_matrix(self) -> SparseIntMatrix:
        """Δ(x_0, ..., x_m) = (x_j - r(x_{j+1})) on the truncated product (x_{m+1} = 0)."""
        offs = [0]
        for r in self.ranks:
            offs.append(offs[-1] + r)
        ent: Dict[Tuple[int, int], int] = {}
        for j, r in enumerate(self.ranks):
            for a in range(r):
                ent[(offs[j] + a, offs[j] + a)] = 1
        for j, f in enumerate(self.maps):
            for (a, b), v in f.items():
                key = (offs[j] + a, offs[j + 1] + b)
                ent[key] = ent.get(key, 0) - v
        total = offs[-1]
        return SparseIntMatrix(total, total, {k: v for k, v in ent.items() if v})

    def composite(self, j: int) -> SparseIntMatrix:
        """M_{start+j} -> M_start."""
        acc = SparseIntMatrix.identity(self.ranks[0])
        for f in self.maps[:j]:
            acc = acc @ f
        return acc


@dataclass
class TowerReport:
    lim_rank: int
    lim_index: ModuleDescriptor
    lim_generators: List[Dict[int, int]]
    lim1_window: ModuleDescriptor
    defects: List[ModuleDescriptor]
    delta_cokernel: ModuleDescriptor

    @property
    def stabilizes(self) -> bool:
        """Images stop shrinking by the end of the window (the last defect is zero)."""
        return not self.defects or self.defects[-1].is_zero

    def to_json_obj(self) -> dict:
        return {
            "lim_rank": self.lim_rank,
            "stabilizes": self.stabilizes,
            "lim_index": self.lim_index.to_json_obj(),
            "lim1_window": self.lim1_window.to_json_obj(),
            "defects": [m.to_json_obj() for m in self.defects],
            "delta_cokernel": self.delta_cokernel.to_json_obj(),
        }


def _coords_in_basis(basis: SparseIntMatrix, vecs: List[Dict[int, int]]) -> SparseIntMatrix:
    """Integer coordinates of vectors lying in the column span of a full-column-rank matrix."""
    s = smith(basis, transforms=True)
    r = s.rank
    cols = []
    for v in vecs:
        y = s.left.apply(v)
        z = {}
        for k in range(r):
            val = y.get(k, 0)
            if val % s.divisors[k]:
                raise ConsistencyError("vector is not in the lattice")
            if val:
                z[k] = val // s.divisors[k]
        if any(y.get(k, 0) for k in range(r, basis.rows)):
            raise ConsistencyError("vector is not in the span")
        cols.append(s.right.apply(z))
    return SparseIntMatrix.from_columns(basis.cols, cols)


def _independent_columns(A: SparseIntMatrix, ring: CoefficientRing) -> SparseIntMatrix:
    """A basis of the column lattice of A (over ring)."""
    if A.nnz == 0:
        return SparseIntMatrix.zero(A.rows, 0)
    s = _ring_smith(A, ring, transforms=True)
    cols = s.left_inverse.column_dicts()
    out = []
    for k, dv in enumerate(s.divisors):
        out.append({i: v * dv for i, v in cols[k].items() if v})
    return SparseIntMatrix.from_columns(A.rows, out)


def _sum_descriptors(ds: Sequence[ModuleDescriptor], ring: CoefficientRing) -> ModuleDescriptor:
    free = sum(m.free_rank for m in ds)
    facs = [f for m in ds for f in m.invariant_factors]
    if not facs:
        return ModuleDescriptor(free)
    diag = SparseIntMatrix(len(facs), len(facs), {(i, i): f for i, f in enumerate(facs)})
    return ModuleDescriptor.from_divisors(free, smith(diag).divisors, ring)


def hcu_assemble(window: TowerWindow) -> TowerReport:
    """Finite-window lim and lim^1 of a tower of free modules.

    lim is the image of the longest composite in M_start.  The lim^1 window
    is the sum of the successive quotients im(M_{j}) / im(M_{j+1}) inside
    M_start (the Mittag-Leffler defect seen by the window).  The cokernel of
    Δ on the truncated product is reported as well; it is always zero since
    the truncated Δ is unitriangular.
    """
    ring = window.ring
    m = len(window.ranks)
    images = []
    for j in range(m):
        comp = window.composite(j)
        images.append(_independent_columns(comp, ring))
    defects = []
    for j in range(m - 1):
        big, small = images[j], images[j + 1]
        if big.cols == 0:
            defects.append(ModuleDescriptor())
            continue
        X = _coords_in_basis(big, small.column_dicts())
        info = _rank_info(X, ring)
        defects.append(ModuleDescriptor.from_divisors(big.cols - info.rank, info.divisors, ring))
    last = images[-1]
    lim_info = _rank_info(last, ring)
    lim_index = ModuleDescriptor.from_divisors(window.ranks[0] - lim_info.rank, lim_info.divisors, ring)
    Delta = window.delta_matrix()
    dinfo = _rank_info(Delta, ring)
    dcok = ModuleDescriptor.from_divisors(Delta.rows - dinfo.rank, dinfo.divisors, ring)
    return TowerReport(lim_info.rank, lim_index, last.column_dicts(), _sum_descriptors(defects, ring), defects, dcok)


@dataclass
class GradedTowerReport:
    d: int
    per_degree: Dict[int, TowerReport]
    stable_ranks: Dict[int, Dict[int, int]]

    @property
    def lim_concentrated(self) -> bool:
        return all(r.lim_rank == 0 for k, r in self.per_degree.items() if k != self.d)

    @property
    def lim1_consistent(self) -> bool:
        """The degree d-1 tower contributes nothing to lim^1 (no classes survive there)."""
        below = self.per_degree.get(self.d - 1)
        return below is None or below.lim1_window.is_zero

    @property
    def ok(self) -> bool:
        return self.lim_concentrated and self.lim1_consistent

    def to_json_obj(self) -> dict:
        return {"d": self.d, "ok": self.ok, "lim_concentrated": self.lim_concentrated,
                "lim1_consistent": self.lim1_consistent,
                "per_degree": {str(k): r.to_json_obj() for k, r in self.per_degree.items()},
                "stable_ranks": {str(k): {str(j): v for j, v in d.items()} for k, d in self.stable_ranks.items()}}


def w_space_tower(pc: ProductComplex, specs, shifts: Sequence[int], n: int, ring: CoefficientRing = ZZ,
                  window: int = 2) -> GradedTowerReport:
    """Towers H^k(W_j) <- H^k(W_{j+1}) for the W-spaces with heights r_Q + shift_j.

    Degree d uses the stage-n groups with restriction maps.  Below degree d
    the stable part of each stage (the image of stage n - window) is used;
    its rank comes from the death check and a zero rank makes the tower zero.
    """
    from .prodcomplex import MultiComplement

    d = pc.d
    regions = [MultiComplement([type(s)(s.ends, s.r + sh) for s in specs]) for sh in shifts]
    bases = [cohomology_basis(truncation_pair(pc, R, n).delta(d - 1), truncation_pair(pc, R, n).delta(d), ring)
             for R in regions]
    maps = []
    for j in range(len(regions) - 1):
        small, big = truncation_pair(pc, regions[j], n), truncation_pair(pc, regions[j + 1], n)
        idx = big.index(d)
        R = SparseIntMatrix(small.size(d), big.size(d),
                            {(a, idx[c]): 1 for a, c in enumerate(small.cells[d])})
        maps.append(induced_map(bases[j + 1], bases[j], R, ring))
    top = TowerWindow.from_descriptors(0, [b.descriptor for b in bases], maps, ring)
    per = {d: hcu_assemble(top)}
    stable: Dict[int, Dict[int, int]] = {}
    for k in range(d):
        ranks = {}
        for j, R in enumerate(regions):
            rep = eventual_death_check(pc, R, k, window, ring, stages=[n - window])
            ranks[j] = rep.image_ranks[n - window]
        stable[k] = ranks
        if all(v == 0 for v in ranks.values()):
            zero = TowerWindow(0, [0] * len(regions), [SparseIntMatrix.zero(0, 0)] * (len(regions) - 1), ring)
            per[k] = hcu_assemble(zero)
        else:
            # maps between the stable parts are not assembled; a surviving class already breaks concentration
            per[k] = TowerReport(max(ranks.values()), ModuleDescriptor(), [], ModuleDescriptor(), [],
                                 ModuleDescriptor())
    return GradedTowerReport(d, per, stable)
