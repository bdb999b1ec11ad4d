"""The horosphere tower inside the corner model.

S_m ⊆ R^{Λ_N} is the image of H_c^{d-1}(Y_m) under the connecting map,
realised at stage N in two independent ways:

* ``supported``: evaluations of cochains supported on top cells of B_m
  (cells with min beta >= m);
* ``restriction``: classes whose corner-cell representative restricts to a
  coboundary on L_m, the closure of the top cells with min beta < m.

Vectors are stored in the difference coordinates of :class:`CornerModel`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .cohomo import corner_model, truncation_pair
from .errors import ConsistencyError, InputError, TruncationDepthError
from .exactalg import (
    ZZ,
    CoefficientRing,
    PrimeField,
    SparseIntMatrix,
    Submodule,
    _ring_smith,
    image_slice,
    kernel_basis,
    purity_check,
    submodule_ops,
)
from .prodcomplex import ProductComplex, StrictSublevel, Superlevel, cell_dim
from .treegeo import TruncatedTree

# ---------------------------------------------------------------------------
# S_m
# ---------------------------------------------------------------------------


@dataclass
class YSubmodule:
    m: int
    N: int
    module: Submodule
    derivation: str
    agree: Optional[bool] = None
    other: Optional[Submodule] = None

    @property
    def rank(self) -> int:
        return self.module.lattice_data()[0]

    def to_json_obj(self) -> dict:
        return {"m": self.m, "N": self.N, "rank": self.rank, "derivation": self.derivation, "agree": self.agree}


def _supported(pc: ProductComplex, m: int, N: int) -> Submodule:
    M = corner_model(pc, N)
    P = truncation_pair(pc, Superlevel(m), N)
    return Submodule.span(M.size, [M.ev_column(c) for c in P.cells[pc.d]])


def _restriction_kernel(pc: ProductComplex, m: int, N: int) -> Submodule:
    d = pc.d
    M = corner_model(pc, N)
    L = truncation_pair(pc, StrictSublevel(m), N)
    idx = L.index(d)
    keep, keep_v, free_v = [], [], []
    for k in range(M.size):
        v = M.tuple_at(k)
        cell = tuple(2 * x + 1 for x in v)
        if cell in idx:
            keep.append(idx[cell])
            keep_v.append(k)
        else:
            free_v.append(k)
    vecs = []
    for g in image_slice(L.delta(d - 1), keep):
        vecs.append({keep_v[j]: x for j, x in g.items()})
    vecs += [{k: 1} for k in free_v]
    return Submodule.span(M.size, [to_difference(M, v) for v in vecs])


def to_difference(M, vec: Dict[int, int]) -> Dict[int, int]:
    """Standard coordinates of R^{Λ_n} to difference coordinates."""
    out: Dict[int, int] = {}
    for idx, x in vec.items():
        parts = []
        rem = idx
        for i in range(M.pc.d):
            k, rem = divmod(rem, M.strides[i])
            parts.append(M._factor_vector(i, k, k + 1, "difference"))
        for j, y in M._tensor(parts).items():
            out[j] = out.get(j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def y_submodule(pc: ProductComplex, m: int, N: Optional[int] = None, derivation: str = "both") -> YSubmodule:
    """S_m at stage N; with ``both`` the two derivations are compared and a mismatch raises."""
    N = pc.N if N is None else N
    if N > pc.N:
        raise TruncationDepthError(f"stage {N} exceeds depth {pc.N}; deepen truncation")
    if derivation == "supported":
        return YSubmodule(m, N, _supported(pc, m, N), derivation)
    if derivation == "restriction":
        return YSubmodule(m, N, _restriction_kernel(pc, m, N), derivation)
    if derivation != "both":
        raise InputError(f"unknown derivation {derivation!r}")
    a = _supported(pc, m, N)
    b = _restriction_kernel(pc, m, N)
    agree = a.lattice_data() == b.lattice_data() and a.contains_module(b)
    if not agree:
        raise ConsistencyError(f"the two derivations of S_{m} at stage {N} differ")
    return YSubmodule(m, N, a, derivation, True, b)


@dataclass
class YSystem:
    """S_m for a window of m-values at a fixed stage N."""

    pc: ProductComplex
    N: int
    members: Dict[int, YSubmodule] = field(default_factory=dict)

    def compute(self, m_values: Sequence[int], derivation: str = "both") -> "YSystem":
        for m in m_values:
            if m not in self.members:
                self.members[m] = y_submodule(self.pc, m, self.N, derivation)
        return self

    def nested(self) -> Dict[int, bool]:
        """S_{m+1} ⊆ S_m for consecutive computed m."""
        out = {}
        for m in sorted(self.members):
            if m + 1 in self.members:
                out[m] = self.members[m].module.contains_module(self.members[m + 1].module)
        return out

    def purity(self) -> Dict[int, bool]:
        return {m: purity_check(s.module) for m, s in sorted(self.members.items())}

    def to_json_obj(self) -> dict:
        return {"N": self.N, "members": [s.to_json_obj() for _, s in sorted(self.members.items())],
                "nested": {str(k): v for k, v in self.nested().items()}}


def max_beta(pc: ProductComplex, n: int):
    """max beta over K_n."""
    return sum(w * n for w in pc.weights)


def default_m_values(pc: ProductComplex, N: int) -> List[int]:
    """m with B_m meeting the stage-N interior: 0 .. max beta of a top cell's lower corner."""
    top = sum(w * (N - 1) for w in pc.weights)
    return list(range(0, int(top) + 1))


@dataclass
class WindowLimReport:
    pairs: Dict[Tuple[int, int], Optional[bool]]
    witness: Optional[dict] = None

    @property
    def ok(self) -> bool:
        vals = [v for v in self.pairs.values() if v is not None]
        return bool(vals) and all(vals)

    def to_json_obj(self) -> dict:
        return {"ok": self.ok, "pairs": [{"n": n, "m": m, "result": "not-applicable" if v is None else v}
                                         for (n, m), v in sorted(self.pairs.items())], "witness": self.witness}


def window_lim_check(system: YSystem, pairs: Optional[Sequence[Tuple[int, int]]] = None) -> WindowLimReport:
    """S_m ∩ im(f_{n->N}) = 0 for every (n, m) with m > max beta on K_{n+1}."""
    pc, N = system.pc, system.N
    if pairs is None:
        pairs = [(n, m) for n in range(0, N) for m in sorted(system.members)]
    out: Dict[Tuple[int, int], Optional[bool]] = {}
    witness = None
    MN = corner_model(pc, N)
    for n, m in pairs:
        if n + 1 > N or m <= max_beta(pc, n + 1):
            out[(n, m)] = None
            continue
        S = system.compute([m]).members[m].module
        F = corner_model(pc, n).transition(MN)
        img = Submodule(MN.size, F)
        r_s, r_f = S.lattice_data()[0], img.lattice_data()[0]
        r_sum = Submodule(MN.size, S.generators.hstack(F)).lattice_data()[0]
        ok = r_sum == r_s + r_f
        out[(n, m)] = ok
        if not ok and witness is None:
            inter = submodule_ops(S, img, "intersection")
            vec = inter.generators.column_dicts()[0]
            witness = {"n": n, "m": m, "vector": {str(k): v for k, v in sorted(vec.items())}}
    return WindowLimReport(out, witness)


# ---------------------------------------------------------------------------
# division witnesses
# ---------------------------------------------------------------------------


@dataclass
class DivisionReport:
    m: int
    r: int
    spanning: int
    ok: bool
    failure: Optional[dict] = None

    def to_json_obj(self) -> dict:
        return {"m": self.m, "r": self.r, "spanning": self.spanning, "ok": self.ok, "failure": self.failure}


def multiples_spanning_set(S: Submodule, r: int) -> List[Dict[int, int]]:
    """Generators of S ∩ rR^n for a prime r: B·lift(ker(B mod r)) together with r·B."""
    B = S.generators
    out = []
    for k in kernel_basis(B, PrimeField(r)):
        v = {i: x for i, x in B.apply(k).items() if x}
        if v:
            out.append(v)
    out += [{i: r * x for i, x in col.items()} for col in B.column_dicts() if col]
    return out


def division_witness(S: Submodule, r: int, psi: Dict[int, int]) -> Dict[int, int]:
    """φ̃ with r·φ̃ = ψ and φ̃ ∈ S, for ψ ∈ S ∩ rR^n; raises on a purity violation."""
    if r == 0:
        raise InputError("r must be nonzero")
    if any(x % r for x in psi.values()):
        raise InputError("ψ is not divisible by r in the ambient module")
    phi = {k: x // r for k, x in psi.items()}
    if not S.contains_module(Submodule.span(S.ambient_rank, [phi], S.ring)):
        raise ConsistencyError("no division witness: S is not pure")
    return phi


def division_check(S: Submodule, m: int, r: int) -> DivisionReport:
    """Division witnesses for a spanning set of S ∩ rR^n, all certified with one lattice comparison."""
    span = multiples_spanning_set(S, r)
    phis = [{k: x // r for k, x in v.items()} for v in span if all(x % r == 0 for x in v.values())]
    if len(phis) != len(span):
        raise ConsistencyError("spanning vector not divisible by r")
    ok = S.contains_module(Submodule.span(S.ambient_rank, phis, S.ring)) if phis else True
    failure = None
    if not ok:
        # locate one offending vector by bisection
        lo, hi = 0, len(phis)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if S.contains_module(Submodule.span(S.ambient_rank, phis[lo:mid], S.ring)):
                lo = mid
            else:
                hi = mid
        failure = {"psi": {str(k): v for k, v in sorted(span[lo].items())}}
    return DivisionReport(m, r, len(span), ok, failure)


# ---------------------------------------------------------------------------
# the zero-chain identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaFamily:
    n: int
    N: int
    v: Tuple[int, ...]
    w: Tuple[int, ...]
    e: Tuple[int, ...]

    def tuple_for(self, sigma: Sequence[int]) -> Tuple[int, ...]:
        return tuple(self.e[i] if i in sigma else self.w[i] for i in range(len(self.w)))

    def subsets(self) -> List[Tuple[int, ...]]:
        d = len(self.w)
        return [tuple(i for i in range(d) if mask >> i & 1) for mask in range(1 << d)]

    def to_json_obj(self) -> dict:
        return {"n": self.n, "N": self.N, "v": list(self.v), "w": list(self.w), "e": list(self.e)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SigmaFamily":
        return cls(obj["n"], obj["N"], tuple(obj["v"]), tuple(obj["w"]), tuple(obj["e"]))


def validate_family(pc: ProductComplex, fam: SigmaFamily) -> None:
    n, N = fam.n, fam.N
    if not 0 <= n < N <= pc.N:
        raise InputError("family needs 0 <= n < N <= depth")
    for i, t in enumerate(pc.factors):
        w, e, v = fam.w[i], fam.e[i], fam.v[i]
        if t.height(w) != -N or not t.is_below(w, t.x(N)) or t.ascend(w, N - n) != v:
            raise InputError(f"w({i}) is not a depth-N tuple above v")
        if v not in t.ec_set(n):
            raise InputError(f"v({i}) is not in EC_n")
        if t.height(e) != -N or not t.is_below(e, t.x(N)):
            raise InputError(f"e({i}) is not in EC_N")
        if not t.is_below(t.ascend(e, N - n - 1), t.x(n + 1)) or t.is_below(t.ascend(e, N - n), t.x(n)):
            raise InputError(f"e({i}) does not detour around x_n")
        # the corner path of e avoids C_{i,n}, so F_{w_σ} misses K_n for σ ≠ ∅
        u = e
        while u != t.x(N):
            if t.in_c(u, n):
                raise InputError(f"corner path of e({i}) meets C_n")
            u = t.parent(u)


def _factor_choices(t: TruncatedTree, n: int, N: int) -> Tuple[List[Tuple[int, int]], List[int]]:
    ws = []
    for v in t.ec_set(n):
        for w in t.descendants_at(v, -N):
            ws.append((v, w))
    es = []
    for e in t.ec_set(N):
        if t.is_below(t.ascend(e, N - n - 1), t.x(n + 1)) and not t.is_below(t.ascend(e, N - n), t.x(n)):
            es.append(e)
    return ws, es


def iter_sigma_families(pc: ProductComplex, n: int, N: Optional[int] = None) -> Iterator[SigmaFamily]:
    """Every admissible family at (n, N) in lexicographic order."""
    N = pc.N if N is None else N
    per = [_factor_choices(t, n, N) for t in pc.factors]
    for ws in product(*[p[0] for p in per]):
        v = tuple(x[0] for x in ws)
        w = tuple(x[1] for x in ws)
        for e in product(*[p[1] for p in per]):
            yield SigmaFamily(n, N, v, w, e)


def count_sigma_families(pc: ProductComplex, n: int, N: int) -> int:
    total = 1
    for t in pc.factors:
        ws, es = _factor_choices(t, n, N)
        total *= len(ws) * len(es)
    return total


def sample_sigma_families(pc: ProductComplex, n: int, N: int, k: int, seed: int = 0) -> List[SigmaFamily]:
    rng = random.Random(seed)
    per = [_factor_choices(t, n, N) for t in pc.factors]
    out = []
    for _ in range(k):
        ws = [rng.choice(p[0]) for p in per]
        es = [rng.choice(p[1]) for p in per]
        out.append(SigmaFamily(n, N, tuple(x[0] for x in ws), tuple(x[1] for x in ws), tuple(es)))
    return out


def admissible_m(pc: ProductComplex, n: int, N: int) -> List[int]:
    """m with max beta(K_{n+1}) < m <= max lower-corner beta at stage N (unit weights)."""
    lo = max_beta(pc, n + 1)
    hi = sum(w * (N - 1) for w in pc.weights)
    return [m for m in range(int(lo) + 1, int(hi) + 1) if lo < m <= hi]


class BranchSwap:
    """Order-two automorphism of a regular tree swapping the branches through two vertices.

    ``a`` and ``b`` are vertices at the same height whose ancestors at height
    ``level`` are distinct siblings; the swap exchanges the two subtrees
    hanging from those ancestors so that the path of a maps onto the path of b,
    and fixes every other vertex.
    """

    def __init__(self, tree: TruncatedTree, i: int, a: int, b: int, level: int):
        self.tree = tree
        self.i = i
        ha = tree.height(a)
        if tree.height(b) != ha:
            raise InputError("swapped vertices must share a height")
        ra, rb = tree.ascend(a, level - ha), tree.ascend(b, level - ha)
        if ra == rb or tree.parent(ra) != tree.parent(rb):
            raise InputError("branches must hang from distinct siblings")
        self.level = level
        self.roots = (ra, rb)
        pa = set(_path_up(tree, a, ra))
        pb = set(_path_up(tree, b, rb))
        self.map: Dict[int, int] = {}
        stack = [(ra, rb)]
        while stack:
            x, y = stack.pop()
            self.map[x] = y
            self.map[y] = x
            cx, cy = list(tree.children(x)), list(tree.children(y))
            if len(cx) != len(cy):
                raise InputError("branches are not isomorphic")
            # match the marked path first, then the rest in order
            mx = [c for c in cx if c in pa]
            my = [c for c in cy if c in pb]
            if len(mx) != len(my):
                raise InputError("marked paths end at different depths")
            rest_x = [c for c in cx if c not in pa]
            rest_y = [c for c in cy if c not in pb]
            for u, w in zip(mx + rest_x, my + rest_y):
                stack.append((u, w))

    def __call__(self, v: int) -> int:
        return self.map.get(v, v)

    def verify(self, a: int, b: int) -> bool:
        t = self.tree
        if self(a) != b:
            return False
        for x, y in self.map.items():
            if self(y) != x or t.height(x) != t.height(y):
                return False
            p = t.parent(x)
            if p is not None and self(p) != t.parent(y):
                return False
        return all(t.height(x) < self.level + 1 for x in self.map)


def _path_up(t: TruncatedTree, v: int, top: int) -> List[int]:
    out = [v]
    while v != top:
        v = t.parent(v)
        out.append(v)
    return out


def _edge_path(t: TruncatedTree, v: int, N: int) -> Dict[int, int]:
    """Edges of the corner path from v up to x_N, keyed by the height of their lower endpoint."""
    out = {}
    while v != t.x(N):
        out[t.height(v)] = v
        v = t.parent(v)
    return out


@dataclass
class ZeroChainResult:
    ok: bool
    checksum: int
    cells: int
    residue: Dict[Tuple[int, ...], int] = field(default_factory=dict)


class ZeroChainChecker:
    """Σ_σ (-1)^{|σ|} [top cells of F_{w_σ} in Ŷ_m] for families at a fixed (n, N).

    Paths and height tuples are cached; the chain itself is accumulated cell
    by cell, never simplified symbolically.
    """

    def __init__(self, pc: ProductComplex, n: int, N: int):
        if any(w.denominator != 1 for w in pc.weights):
            raise InputError("the zero-chain identity is checked for integral weights")
        self.pc = pc
        self.n = n
        self.N = N
        self._paths: List[Dict[int, Dict[int, int]]] = [{} for _ in pc.factors]
        self._heights: Dict[int, List[Tuple[int, ...]]] = {}
        self._swaps: Dict[Tuple[int, int, int], bool] = {}

    def path(self, i: int, v: int) -> Dict[int, int]:
        cache = self._paths[i]
        if v not in cache:
            cache[v] = _edge_path(self.pc.factors[i], v, self.N)
        return cache[v]

    def heights(self, m: int) -> List[Tuple[int, ...]]:
        """Lower-endpoint heights (a_1..a_d) with Σ λ_i a_i = m."""
        if m not in self._heights:
            rng = range(-self.N, self.N)
            w = [int(x) for x in self.pc.weights]
            self._heights[m] = [a for a in product(rng, repeat=self.pc.d)
                                if sum(wi * ai for wi, ai in zip(w, a)) == m]
        return self._heights[m]

    def swap_ok(self, i: int, a: int, b: int) -> bool:
        key = (i, a, b)
        if key not in self._swaps:
            t = self.pc.factors[i]
            u = BranchSwap(t, i, a, b, self.n)
            ok = u.verify(a, b)
            # u maps the corner path of a onto that of b
            pa, pb = self.path(i, a), self.path(i, b)
            ok = ok and all(u(pa[h]) == pb[h] for h in pa)
            self._swaps[key] = ok
        return self._swaps[key]

    def check(self, fam: SigmaFamily, m: int, swaps: bool = True) -> ZeroChainResult:
        d = self.pc.d
        chain: Dict[Tuple[int, ...], int] = {}
        checksum = 0
        count = 0
        hts = self.heights(m)
        for sigma in fam.subsets():
            sign = -1 if len(sigma) % 2 else 1
            tup = fam.tuple_for(sigma)
            paths = [self.path(i, tup[i]) for i in range(d)]
            for a in hts:
                cell = tuple(2 * paths[i][a[i]] + 1 for i in range(d))
                chain[cell] = chain.get(cell, 0) + sign
                checksum += sign
                count += 1
        residue = {c: x for c, x in chain.items() if x}
        ok = not residue and checksum == 0
        if swaps:
            ok = ok and all(self.swap_ok(i, fam.w[i], fam.e[i]) for i in range(d))
        return ZeroChainResult(ok, checksum, count, residue)


def zero_chain_identity(pc: ProductComplex, fam: SigmaFamily, m: int) -> bool:
    validate_family(pc, fam)
    if m not in admissible_m(pc, fam.n, fam.N):
        raise InputError(f"m={m} is not admissible for n={fam.n}, N={fam.N}")
    return ZeroChainChecker(pc, fam.n, fam.N).check(fam, m).ok


@dataclass
class ZeroChainSweep:
    families: int
    checks: int
    failures: List[dict]
    swaps_verified: int

    @property
    def ok(self) -> bool:
        return self.checks > 0 and not self.failures

    def to_json_obj(self) -> dict:
        return {"families": self.families, "checks": self.checks, "failures": self.failures[:5],
                "swaps_verified": self.swaps_verified, "ok": self.ok}


def zero_chain_sweep(pc: ProductComplex, N: Optional[int] = None, sample: Optional[int] = None,
                     seed: int = 0) -> ZeroChainSweep:
    """Run the identity over all admissible (n, m) and all (or sampled) families."""
    N = pc.N if N is None else N
    fams = checks = 0
    failures: List[dict] = []
    swaps = 0
    for n in range(0, N):
        ms = admissible_m(pc, n, N)
        if not ms:
            continue
        chk = ZeroChainChecker(pc, n, N)
        source = iter_sigma_families(pc, n, N) if sample is None else sample_sigma_families(pc, n, N, sample, seed)
        for k, fam in enumerate(source):
            if k == 0 or sample is not None:
                validate_family(pc, fam)
            fams += 1
            for m in ms:
                res = chk.check(fam, m)
                checks += 1
                if not res.ok:
                    failures.append({"family": fam.to_json_obj(), "m": m, "checksum": res.checksum})
        swaps += len(chk._swaps)
    return ZeroChainSweep(fams, checks, failures, swaps)


# ---------------------------------------------------------------------------
# fiber kernel
# ---------------------------------------------------------------------------


@dataclass
class FiberKernelReport:
    applicable: bool
    vertices: int
    columns: int
    rank: int
    single_zero_ok: bool
    samples: int

    @property
    def ok(self) -> bool:
        return not self.applicable or (self.rank == self.columns and self.single_zero_ok)

    def to_json_obj(self) -> dict:
        return {"applicable": self.applicable, "vertices": self.vertices, "columns": self.columns,
                "rank": self.rank, "single_zero_ok": self.single_zero_ok, "samples": self.samples, "ok": self.ok}


def fiber_kernel_check(pc: ProductComplex, w: int, region, ring: CoefficientRing = ZZ, stage: Optional[int] = None,
                       samples: int = 20, seed: int = 0) -> FiberKernelReport:
    """Injectivity of d: ⊕_y H^{d-1}(Z_y) -> ⊕_e H^{d-1}(Z_e) over the interior vertices of factor w.

    Z_e is the (d-1)-factor W-space over the open edge e and Z_y the union of
    the Z_e for e at y; groups are taken at the given stage of the fiber
    complex and ρ_{y,e} is restriction.  Also checks on random classes x
    that ρ_{y,e}(x) = 0 for at most one e at y.
    """
    from .cohomo import cohomology_basis, induced_map
    from .prodcomplex import MultiComplement, fiber_parameters, fiber_specs

    if region.kind != "multi":
        return FiberKernelReport(False, 0, 0, 0, True, 0)
    if pc.d < 2:
        raise InputError("fiber kernels need at least two factors")
    t = pc.factors[w]
    rest = pc.drop_factor(w)
    k = pc.d - 1
    stage = rest.N if stage is None else stage
    specs = region.specs
    params = {e: tuple(fiber_parameters(pc, w, e, specs)) for e in t.edge_list()}

    cache: Dict[Tuple, Tuple] = {}

    def fiber(key):
        if key not in cache:
            if key[0] == "edge":
                cells = set(rest.iter_cells(MultiComplement(fiber_specs(specs, w, key[1])), stage, True))
            else:
                cells = set()
                for p in key[1]:
                    cells |= set(rest.iter_cells(MultiComplement(fiber_specs(specs, w, p)), stage, True))
            by = [sorted(c for c in cells if cell_dim(c) == j) for j in range(rest.d + 1)]
            din = rest.coboundary_between(by[k - 1], by[k]) if k >= 1 else SparseIntMatrix.zero(len(by[0]), 0)
            dout = rest.coboundary_between(by[k], by[k + 1]) if k < rest.d else SparseIntMatrix.zero(0, len(by[k]))
            cache[key] = (by, cohomology_basis(din, dout, ring))
        return cache[key]

    inner = [y for y in t.vertices() if -t.N < t.height(y) < t.N]
    vkeys = {y: ("vertex", tuple(sorted(set(params[e] for e in t.incident_edges(y))))) for y in inner}
    edges = sorted({e for y in inner for e in t.incident_edges(y)})
    col_off, c = {}, 0
    for y in inner:
        col_off[y] = c
        c += fiber(vkeys[y])[1].dim
    row_off, r = {}, 0
    for e in edges:
        row_off[e] = r
        r += fiber(("edge", params[e]))[1].dim
    rho_cache: Dict[Tuple, SparseIntMatrix] = {}

    def rho(y, e):
        key = (vkeys[y], params[e])
        if key not in rho_cache:
            by_y, by_basis = fiber(vkeys[y])
            by_e, e_basis = fiber(("edge", params[e]))
            idx = {cell: a for a, cell in enumerate(by_y[k])}
            R = SparseIntMatrix(len(by_e[k]), len(by_y[k]), {(a, idx[cell]): 1 for a, cell in enumerate(by_e[k])})
            rho_cache[key] = induced_map(by_basis, e_basis, R, ring)
        return rho_cache[key]

    ent: Dict[Tuple[int, int], int] = {}
    for y in inner:
        for e in t.incident_edges(y):
            sign = 1 if t.parent(e) == y else -1
            for (a, b), v in rho(y, e).items():
                key = (row_off[e] + a, col_off[y] + b)
                ent[key] = ent.get(key, 0) + sign * v
    D = SparseIntMatrix(r, c, {k2: v for k2, v in ent.items() if v})
    rank = _ring_smith(D, ring).rank if D.nnz else 0
    rng = random.Random(seed)
    single = True
    done = 0
    for _ in range(samples):
        y = rng.choice(inner)
        dim = fiber(vkeys[y])[1].dim
        if dim == 0:
            continue
        x = {j: rng.randint(-3, 3) for j in range(dim)}
        x = {j: v for j, v in x.items() if v}
        if not x:
            continue
        done += 1
        zeros = sum(1 for e in t.incident_edges(y) if not rho(y, e).apply(x))
        if zeros > 1:
            single = False
    return FiberKernelReport(True, len(inner), c, rank, single, done)
