"""Products of truncated trees as cube complexes.

A cell is a tuple with one integer code per factor: ``2*v`` for the vertex
v and ``2*e + 1`` for the edge whose lower endpoint is e.  Edges are
oriented upward and the boundary of a cube with edge factors at positions
j_1 < ... < j_k is

    sum_m (-1)**(m-1) * (top_m face - bottom_m face).

Busemann values are exact: weights are positive rationals and every
comparison is carried out on integers after clearing denominators.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .errors import InputError, TruncationDepthError
from .exactalg import SparseIntMatrix
from .treegeo import RayEnd, TruncatedTree, busemann_map

Cell = Tuple[int, ...]
Ends = Optional[Tuple[RayEnd, ...]]


def vertex_code(v: int) -> int:
    return 2 * v


def edge_code(e: int) -> int:
    return 2 * e + 1


def is_edge_code(c: int) -> bool:
    return c & 1 == 1


def cell_dim(cell: Cell) -> int:
    return sum(c & 1 for c in cell)


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


@dataclass(frozen=True)
class HoroballSpec:
    """A closed horoball {beta_Q >= r}: one ray end per factor plus a height."""

    ends: Tuple[RayEnd, ...]
    r: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", Fraction(self.r))
        object.__setattr__(self, "ends", tuple(self.ends))

    def drop(self, w: int, r: Optional[Fraction] = None) -> "HoroballSpec":
        ends = self.ends[:w] + self.ends[w + 1:]
        return HoroballSpec(ends, self.r if r is None else r)

    def to_json_obj(self) -> dict:
        return {"ends": [e.to_json_obj() for e in self.ends], "r": str(self.r)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "HoroballSpec":
        return cls(tuple(RayEnd.from_json_obj(e) for e in obj["ends"]), Fraction(obj["r"]))


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """A subcomplex named by a membership rule.

    kinds: ``whole``, ``superlevel`` (min beta >= r), ``sublevel``
    (max beta <= r), ``strict_sublevel`` (faces of d-cells with
    min beta < r), ``corner`` (cells below every x_{i,m} with min beta >= r),
    ``corner_top`` (cells of the corner block touching some x_{i,m}),
    ``yhat`` (faces of d-cells with min beta = m), ``multi`` (max beta_Q <=
    r_Q for every spec) and ``kblock`` (cells of K_n).
    """

    kind: str
    r: Fraction = Fraction(0)
    m: int = 0
    ends: Ends = None
    specs: Tuple[HoroballSpec, ...] = ()

    KINDS = ("whole", "superlevel", "sublevel", "strict_sublevel", "corner", "corner_top",
             "yhat", "multi", "kblock")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise InputError(f"unknown region kind {self.kind!r}")
        object.__setattr__(self, "r", Fraction(self.r))
        object.__setattr__(self, "specs", tuple(self.specs))

    def label(self) -> str:
        if self.kind in ("superlevel", "sublevel", "strict_sublevel"):
            return f"{self.kind}({self.r})"
        if self.kind in ("corner", "corner_top"):
            return f"{self.kind}(m={self.m}, r={self.r})"
        if self.kind in ("yhat", "kblock"):
            return f"{self.kind}({self.m})"
        if self.kind == "multi":
            return "multi(" + ", ".join(str(s.r) for s in self.specs) + ")"
        return self.kind


def Whole() -> Region:
    return Region("whole")


def Superlevel(r, ends: Ends = None) -> Region:
    return Region("superlevel", r=Fraction(r), ends=ends)


def Sublevel(r, ends: Ends = None) -> Region:
    return Region("sublevel", r=Fraction(r), ends=ends)


def StrictSublevel(r) -> Region:
    return Region("strict_sublevel", r=Fraction(r))


def CornerBlock(m: int, r) -> Region:
    return Region("corner", r=Fraction(r), m=m)


def CornerTop(m: int, r) -> Region:
    return Region("corner_top", r=Fraction(r), m=m)


def YHat(m: int) -> Region:
    return Region("yhat", m=m)


def MultiComplement(specs: Sequence[HoroballSpec]) -> Region:
    if not specs:
        raise InputError("a multi-horoball complement needs at least one horoball")
    return Region("multi", specs=tuple(specs))


def KBlock(n: int) -> Region:
    return Region("kblock", m=n)


# ---------------------------------------------------------------------------
# the product complex
# ---------------------------------------------------------------------------


class ProductComplex:
    """X = T_1 x ... x T_d with beta = sum_i lambda_i h_i."""

    def __init__(self, factors: Sequence[TruncatedTree], weights: Optional[Sequence] = None):
        if not factors:
            raise InputError("need at least one factor")
        self.factors = tuple(factors)
        self.d = len(self.factors)
        if weights is None:
            weights = [1] * self.d
        if len(weights) != self.d:
            raise InputError("one weight per factor")
        self.weights = tuple(Fraction(w) for w in weights)
        if any(w <= 0 for w in self.weights):
            raise InputError("weights must be positive")
        self.scale = 1
        for w in self.weights:
            self.scale = self.scale * w.denominator // math.gcd(self.scale, w.denominator)
        self.int_weights = tuple(int(w * self.scale) for w in self.weights)
        self._ranges: Dict[Tuple[int, Optional[RayEnd]], Tuple[List[int], List[int]]] = {}
        self._codes: Dict[Tuple[int, Optional[int], bool], List[int]] = {}

    @property
    def N(self) -> int:
        return min(t.N for t in self.factors)

    def __repr__(self) -> str:
        return f"ProductComplex(d={self.d}, N={self.N}, weights={[str(w) for w in self.weights]})"

    def drop_factor(self, w: int) -> "ProductComplex":
        if self.d < 2:
            raise InputError("cannot drop the only factor")
        return ProductComplex(self.factors[:w] + self.factors[w + 1:], self.weights[:w] + self.weights[w + 1:])

    # per-factor data -----------------------------------------------------------
    def factor_codes(self, i: int, n: Optional[int] = None, interior: bool = False) -> List[int]:
        """Cell codes of factor i: the whole truncation, or C_{i,n} (optionally minus its frontier)."""
        key = (i, n, interior)
        if key in self._codes:
            return self._codes[key]
        t = self.factors[i]
        if n is None:
            verts = list(t.vertices())
            out = [2 * v for v in verts] + [2 * e + 1 for e in verts if t.parent(e) is not None]
            if interior:
                raise InputError("interior codes need a stage")
        else:
            cs = t.c_set(n)
            top = t.x(n)
            frontier = set(t.ec_set(n)) | {top}
            out = [2 * v for v in cs if not (interior and v in frontier)]
            out += [2 * e + 1 for e in cs if e != top]
        out.sort()
        self._codes[key] = out
        return out

    def factor_range(self, i: int, end: Optional[RayEnd] = None) -> Tuple[List[int], List[int]]:
        """Per-code (min, max) of the factor Busemann function for ``end``.

        ``end=None`` means the height function h_i.
        """
        key = (i, end)
        if key in self._ranges:
            return self._ranges[key]
        t = self.factors[i]
        if end is None:
            b = [t.height(v) for v in t.vertices()]
        else:
            b = busemann_map(t, end)
        size = 2 * t.num_vertices
        lo = [0] * size
        hi = [0] * size
        for v in t.vertices():
            lo[2 * v] = hi[2 * v] = b[v]
            p = t.parent(v)
            if p is not None:
                lo[2 * v + 1] = min(b[v], b[p])
                hi[2 * v + 1] = max(b[v], b[p])
        self._ranges[key] = (lo, hi)
        return lo, hi

    def _end(self, ends: Ends, i: int) -> Optional[RayEnd]:
        return None if ends is None else ends[i]

    # cells -----------------------------------------------------------------------
    def corners(self, cell: Cell) -> Iterator[Tuple[int, ...]]:
        choices = []
        for i, c in enumerate(cell):
            if c & 1:
                e = c >> 1
                choices.append((e, self.factors[i].parent(e)))
            else:
                choices.append((c >> 1,))
        return product(*choices)

    def faces(self, cell: Cell) -> List[Tuple[int, Cell]]:
        """Codimension-one faces with their incidence signs."""
        out = []
        m = 0
        for i, c in enumerate(cell):
            if c & 1:
                e = c >> 1
                sign = 1 if m % 2 == 0 else -1
                top = self.factors[i].parent(e)
                out.append((sign, cell[:i] + (2 * top,) + cell[i + 1:]))
                out.append((-sign, cell[:i] + (2 * e,) + cell[i + 1:]))
                m += 1
        return out

    def scaled_bounds(self, cell: Cell, ends: Ends = None) -> Tuple[int, int]:
        lo_sum = hi_sum = 0
        for i, c in enumerate(cell):
            lo, hi = self.factor_range(i, self._end(ends, i))
            lo_sum += self.int_weights[i] * lo[c]
            hi_sum += self.int_weights[i] * hi[c]
        return lo_sum, hi_sum

    def beta_bounds(self, cell: Cell, ends: Ends = None) -> Tuple[Fraction, Fraction]:
        lo, hi = self.scaled_bounds(cell, ends)
        return Fraction(lo, self.scale), Fraction(hi, self.scale)

    def beta_vertex(self, vertex: Sequence[int], ends: Ends = None) -> Fraction:
        return self.beta_bounds(tuple(2 * v for v in vertex), ends)[0]

    def count_cells(self, k: int) -> int:
        """Product-formula count of k-cells in the whole truncation."""
        per = []
        for t in self.factors:
            per.append((t.num_vertices, t.num_vertices - 1))
        total = 0
        for mask in product((0, 1), repeat=self.d):
            if sum(mask) == k:
                term = 1
                for (nv, ne), b in zip(per, mask):
                    term *= ne if b else nv
                total += term
        return total

    # region membership ---------------------------------------------------------------
    def _extendable_down(self, i: int, c: int) -> bool:
        return not (c & 1) and bool(self.factors[i].children(c >> 1))

    def contains(self, region: Region, cell: Cell) -> bool:
        kind = region.kind
        S = self.scale
        if kind == "whole":
            return True
        if kind == "kblock":
            return all(self._code_in_c(i, c, region.m) for i, c in enumerate(cell))
        if kind == "superlevel":
            return self.scaled_bounds(cell, region.ends)[0] >= region.r * S
        if kind == "sublevel":
            return self.scaled_bounds(cell, region.ends)[1] <= region.r * S
        if kind == "strict_sublevel":
            lo = self.scaled_bounds(cell)[0]
            drop = sum(self.int_weights[i] for i, c in enumerate(cell) if self._extendable_down(i, c))
            return lo - drop < region.r * S
        if kind in ("corner", "corner_top"):
            m = region.m
            if not all(self._code_below(i, c, m) for i, c in enumerate(cell)):
                return False
            if self.scaled_bounds(cell)[0] < region.r * S:
                return False
            if kind == "corner_top":
                return any(c == 2 * self.factors[i].x(m) for i, c in enumerate(cell))
            return True
        if kind == "yhat":
            lo = self.scaled_bounds(cell)[0]
            target = region.m * S
            if lo < target:
                return False
            gaps = [self.int_weights[i] for i, c in enumerate(cell) if self._extendable_down(i, c)]
            reachable = {0}
            for g in gaps:
                reachable |= {x + g for x in reachable}
            return (lo - target) in reachable
        if kind == "multi":
            return all(self.scaled_bounds(cell, s.ends)[1] <= s.r * S for s in region.specs)
        raise InputError(f"unknown region kind {kind!r}")

    # enumeration ---------------------------------------------------------------------
    def _pruned_product(self, lists: List[List[int]], constraints: List[Tuple[List[List[int]], int]]) -> Iterator[Cell]:
        """Tuples from ``lists`` with sum_i w_i * vals_i[code] >= bound for each constraint.

        Each constraint is (per-factor value arrays, scaled lower bound).
        """
        d = len(lists)
        w = self.int_weights
        suffix = []
        for vals, _ in constraints:
            best = [0] * (d + 1)
            for i in range(d - 1, -1, -1):
                best[i] = best[i + 1] + (max(w[i] * vals[i][c] for c in lists[i]) if lists[i] else 0)
            suffix.append(best)
        if any(not l for l in lists):
            return
        nc = len(constraints)
        if nc:
            # descending in the first constraint, so a failure there ends the scan
            first = constraints[0][0]
            lists = [sorted(l, key=lambda c, i=i: -first[i][c]) for i, l in enumerate(lists)]

        def rec(i: int, prefix: Tuple[int, ...], partial: List[int]) -> Iterator[Cell]:
            if i == d:
                yield prefix
                return
            for c in lists[i]:
                nxt = []
                ok = True
                for k in range(nc):
                    s = partial[k] + w[i] * constraints[k][0][i][c]
                    if s + suffix[k][i + 1] < constraints[k][1]:
                        ok = False
                        break
                    nxt.append(s)
                if ok:
                    yield from rec(i + 1, prefix + (c,), nxt)
                elif k == 0:
                    break

        yield from rec(0, (), [0] * nc)

    def _support(self, n: Optional[int], interior: bool) -> List[List[int]]:
        return [self.factor_codes(i, n, interior) for i in range(self.d)]

    def iter_cells(self, region: Region, n: Optional[int] = None, interior: bool = False) -> Iterator[Cell]:
        """Cells of ``region`` (restricted to K_n or its interior when n is given)."""
        S = self.scale
        lists = self._support(n, interior)
        kind = region.kind
        neg = lambda arr: [-x for x in arr]  # noqa: E731
        if kind == "whole":
            yield from product(*lists)
            return
        if kind == "kblock":
            m = region.m
            sub = [[c for c in l if self._code_in_c(i, c, m)] for i, l in enumerate(lists)]
            yield from product(*sub)
            return
        if kind == "superlevel":
            lo = [self.factor_range(i, self._end(region.ends, i))[0] for i in range(self.d)]
            yield from self._pruned_product(lists, [(lo, _ceil(region.r * S))])
            return
        if kind == "sublevel":
            hi = [neg(self.factor_range(i, self._end(region.ends, i))[1]) for i in range(self.d)]
            yield from self._pruned_product(lists, [(hi, -_floor(region.r * S))])
            return
        if kind == "multi":
            cons = []
            for s in region.specs:
                hi = [neg(self.factor_range(i, s.ends[i])[1]) for i in range(self.d)]
                cons.append((hi, -_floor(s.r * S)))
            yield from self._pruned_product(lists, cons)
            return
        if kind in ("corner", "corner_top"):
            m = region.m
            self._require_corner_depth(m, region.r)
            sub = [[c for c in l if self._code_below(i, c, m)] for i, l in enumerate(lists)]
            lo = [self.factor_range(i)[0] for i in range(self.d)]
            for cell in self._pruned_product(sub, [(lo, _ceil(region.r * S))]):
                if kind == "corner" or self.contains(region, cell):
                    yield cell
            return
        if kind == "yhat":
            lo = [self.factor_range(i)[0] for i in range(self.d)]
            hi_cap = [neg(x) for x in lo]
            bound = region.m * S
            slack = sum(self.int_weights)
            for cell in self._pruned_product(lists, [(lo, bound), (hi_cap, -(bound + slack))]):
                if self.contains(region, cell):
                    yield cell
            return
        if kind == "strict_sublevel":
            for cell in product(*lists):
                if self.contains(region, cell):
                    yield cell
            return
        raise InputError(f"unknown region kind {kind!r}")

    def iter_outside(self, region: Region, n: Optional[int] = None, interior: bool = False) -> Iterator[Cell]:
        """Cells of the support that are not in ``region`` (a relative complement)."""
        S = self.scale
        lists = self._support(n, interior)
        kind = region.kind
        if kind == "whole":
            return
        if kind == "sublevel":
            hi = [self.factor_range(i, self._end(region.ends, i))[1] for i in range(self.d)]
            yield from self._pruned_product(lists, [(hi, _floor(region.r * S) + 1)])
            return
        if kind == "superlevel":
            lo = [[-x for x in self.factor_range(i, self._end(region.ends, i))[0]] for i in range(self.d)]
            yield from self._pruned_product(lists, [(lo, -(_ceil(region.r * S) - 1))])
            return
        if kind == "multi":
            seen: Set[Cell] = set()
            for s in region.specs:
                hi = [self.factor_range(i, s.ends[i])[1] for i in range(self.d)]
                for c in self._pruned_product(lists, [(hi, _floor(s.r * S) + 1)]):
                    if c not in seen:
                        seen.add(c)
                        yield c
            return
        if kind == "strict_sublevel":
            lo = [self.factor_range(i)[0] for i in range(self.d)]
            for c in self._pruned_product(lists, [(lo, _ceil(region.r * S))]):
                if not self.contains(region, c):
                    yield c
            return
        for c in product(*lists):
            if not self.contains(region, c):
                yield c

    def count_by_dim(self, region: Region, n: Optional[int] = None, interior: bool = False) -> Optional[List[int]]:
        """Cell counts per dimension from per-factor histograms, or None if not a single level constraint."""
        kind = region.kind
        if kind not in ("whole", "superlevel", "sublevel"):
            return None
        lists = self._support(n, interior)
        # histogram keyed by (scaled value, dim) convolved across factors
        acc: Dict[Tuple[int, int], int] = {(0, 0): 1}
        for i in range(self.d):
            if kind == "whole":
                vals = [0] * (max(lists[i]) + 1 if lists[i] else 1)
            else:
                lo, hi = self.factor_range(i, self._end(region.ends, i))
                vals = lo if kind == "superlevel" else hi
            hist: Dict[Tuple[int, int], int] = {}
            for c in lists[i]:
                key = (self.int_weights[i] * vals[c], c & 1)
                hist[key] = hist.get(key, 0) + 1
            nxt: Dict[Tuple[int, int], int] = {}
            for (a, da), x in acc.items():
                for (b, db), y in hist.items():
                    key = (a + b, da + db)
                    nxt[key] = nxt.get(key, 0) + x * y
            acc = nxt
        out = [0] * (self.d + 1)
        bound = region.r * self.scale
        for (v, k), x in acc.items():
            if kind == "whole" or (kind == "superlevel" and v >= bound) or (kind == "sublevel" and v <= bound):
                out[k] += x
        return out

    def _code_in_c(self, i: int, c: int, n: int) -> bool:
        t = self.factors[i]
        v = c >> 1
        if not t.in_c(v, n):
            return False
        return not (c & 1) or v != t.x(n)

    def _code_below(self, i: int, c: int, m: int) -> bool:
        t = self.factors[i]
        v = c >> 1
        if not t.is_below(v, t.x(m)):
            return False
        return not (c & 1) or v != t.x(m)

    def _require_corner_depth(self, m: int, r: Fraction) -> None:
        """The corner block is compact only if the truncation reaches its lowest cells."""
        for i, t in enumerate(self.factors):
            if m > t.N:
                raise TruncationDepthError(f"corner stage {m} exceeds depth {t.N}; deepen truncation")
            others = sum(self.weights[j] * m for j in range(self.d) if j != i)
            lowest = (r - others) / self.weights[i]
            if lowest < -t.N:
                raise TruncationDepthError(
                    f"corner block C({m}) at r={r} reaches height {lowest} in factor {i}; deepen truncation")

    def region_cells(self, region: Region, k: Optional[int] = None, n: Optional[int] = None,
                     interior: bool = False) -> List[Cell]:
        cells = self.iter_cells(region, n, interior)
        if k is not None:
            cells = (c for c in cells if cell_dim(c) == k)
        return sorted(cells)

    def cells_by_dim(self, region: Region, n: Optional[int] = None, interior: bool = False) -> List[List[Cell]]:
        buckets: List[List[Cell]] = [[] for _ in range(self.d + 1)]
        for c in self.iter_cells(region, n, interior):
            buckets[cell_dim(c)].append(c)
        for b in buckets:
            b.sort()
        return buckets

    def is_face_closed(self, cells: Iterable[Cell]) -> Optional[Cell]:
        """None if closed under faces, else a cell with a missing face."""
        pool = set(cells)
        for c in sorted(pool):
            for _, f in self.faces(c):
                if f not in pool:
                    return c
        return None

    # matrices -------------------------------------------------------------------------
    def boundary_between(self, rows: Sequence[Cell], cols: Sequence[Cell]) -> SparseIntMatrix:
        """Boundary matrix with rows = (k-1)-cells and cols = k-cells; absent faces are dropped."""
        index = {c: i for i, c in enumerate(rows)}
        entries = {}
        for j, c in enumerate(cols):
            for s, f in self.faces(c):
                i = index.get(f)
                if i is not None:
                    entries[(i, j)] = s
        return SparseIntMatrix(len(rows), len(cols), entries)

    def coboundary_between(self, low: Sequence[Cell], high: Sequence[Cell]) -> SparseIntMatrix:
        """delta: C^k(low) -> C^{k+1}(high), rows = high cells."""
        index = {c: i for i, c in enumerate(low)}
        entries = {}
        for j, c in enumerate(high):
            for s, f in self.faces(c):
                i = index.get(f)
                if i is not None:
                    entries[(j, i)] = s
        return SparseIntMatrix(len(high), len(low), entries)

    def boundary_matrix(self, region: Region, k: int) -> SparseIntMatrix:
        """Boundary map from k-cells to (k-1)-cells of ``region`` in the whole truncation."""
        if k < 1 or k > self.d:
            rows = self.region_cells(region, k - 1) if 0 <= k - 1 <= self.d else []
            cols = self.region_cells(region, k) if 0 <= k <= self.d else []
            return SparseIntMatrix.zero(len(rows), len(cols))
        return self.boundary_between(self.region_cells(region, k - 1), self.region_cells(region, k))

    # debugging dump ----------------------------------------------------------------------
    def cells_csv(self, cells: Iterable[Cell], ends: Ends = None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["cell", "dim", "beta_min", "beta_max"])
        for c in cells:
            lo, hi = self.beta_bounds(c, ends)
            wr.writerow([" ".join(("e" if x & 1 else "v") + str(x >> 1) for x in c), cell_dim(c), str(lo), str(hi)])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# horoball geometry
# ---------------------------------------------------------------------------


def horoball(spec: HoroballSpec) -> Region:
    return Superlevel(spec.r, spec.ends)


def fiber_parameters(pc: ProductComplex, w: int, e: int, specs: Sequence[HoroballSpec]) -> List[Fraction]:
    """s^e_Q = r_Q - lambda_w * b_{Q,w}(endpoint of e maximising b_{Q,w})."""
    if pc.d < 2:
        raise InputError("fiber parameters need at least two factors")
    t = pc.factors[w]
    if not t.is_edge(e):
        raise InputError(f"{e} does not name an edge of factor {w}")
    out = []
    for s in specs:
        hi = pc.factor_range(w, s.ends[w])[1][2 * e + 1]
        out.append(s.r - pc.weights[w] * hi)
    return out


def fiber_specs(specs: Sequence[HoroballSpec], w: int, params: Sequence[Fraction]) -> Tuple[HoroballSpec, ...]:
    return tuple(s.drop(w, p) for s, p in zip(specs, params))


@dataclass
class FiberCover:
    w: int
    edge_params: Dict[int, Tuple[Fraction, ...]]
    edge_sets: Dict[int, Set[Cell]]
    vertex_sets: Dict[int, Set[Cell]]
    region_cells: Set[Cell]
    uncovered: List[Cell] = field(default_factory=list)
    intersection_failures: List[int] = field(default_factory=list)
    fiber_mismatches: List[int] = field(default_factory=list)
    dichotomy_failures: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.uncovered or self.intersection_failures or self.fiber_mismatches or self.dichotomy_failures)


def _interior_vertices(t: TruncatedTree) -> List[int]:
    return [v for v in t.vertices() if -t.N < t.height(v) < t.N]


def fiber_cover(pc: ProductComplex, w: int, region: Region) -> FiberCover:
    """Cover of a multi-horoball complement by F_e = e x W_{S-w,(s^e_Q)}, with its checks.

    Vertex cells are checked for coverage only over vertices of T_w whose
    full star lies in the truncation.
    """
    if region.kind != "multi":
        raise InputError("fiber covers are defined for multi-horoball complements")
    if pc.d < 2:
        raise InputError("fiber covers need at least two factors")
    t = pc.factors[w]
    specs = region.specs
    rest = pc.drop_factor(w)
    cells = set(pc.iter_cells(region))
    params: Dict[int, Tuple[Fraction, ...]] = {}
    fibers: Dict[Tuple[Fraction, ...], Set[Tuple[int, ...]]] = {}
    edge_sets: Dict[int, Set[Cell]] = {}
    for e in t.edge_list():
        p = tuple(fiber_parameters(pc, w, e, specs))
        params[e] = p
        if p not in fibers:
            fibers[p] = set(rest.iter_cells(MultiComplement(fiber_specs(specs, w, p))))
        top = t.parent(e)
        block = set()
        for f in fibers[p]:
            for c in (2 * e + 1, 2 * e, 2 * top):
                block.add(f[:w] + (c,) + f[w:])
        edge_sets[e] = block
    vertex_sets: Dict[int, Set[Cell]] = {}
    for y in t.vertices():
        acc: Set[Cell] = set()
        for e in t.incident_edges(y):
            acc |= edge_sets[e]
        vertex_sets[y] = acc
    cover = FiberCover(w, params, edge_sets, vertex_sets, cells)
    # fiber identity over open edges
    by_edge: Dict[int, Set[Tuple[int, ...]]] = {e: set() for e in params}
    for c in cells:
        if c[w] & 1:
            by_edge[c[w] >> 1].add(c[:w] + c[w + 1:])
    for e, p in params.items():
        if by_edge[e] != fibers[p]:
            cover.fiber_mismatches.append(e)
    # coverage
    inner = set(_interior_vertices(t))
    union: Set[Cell] = set()
    for s in edge_sets.values():
        union |= s
    for c in sorted(cells):
        if c[w] & 1 or (c[w] >> 1) in inner:
            if c not in union:
                cover.uncovered.append(c)
    # F_y and F_z meet exactly in F_e
    for e in t.edge_list():
        y, z = e, t.parent(e)
        if vertex_sets[y] & vertex_sets[z] != edge_sets[e]:
            cover.intersection_failures.append(e)
    # per-vertex dichotomy of s-values
    for y in inner:
        for qi in range(len(specs)):
            vals = [params[e][qi] for e in t.incident_edges(y)]
            distinct = sorted(set(vals))
            if len(distinct) > 2 or (len(distinct) == 2 and vals.count(distinct[0]) != 1):
                cover.dichotomy_failures.append((y, qi))
    return cover


def top_edge(pc: ProductComplex, w: int, y: int, spec: HoroballSpec) -> int:
    """e(y, Q): the edge at y along which the Q-Busemann function increases."""
    hi = pc.factor_range(w, spec.ends[w])[1]
    for e in pc.factors[w].incident_edges(y):
        if hi[2 * e + 1] > hi[2 * y]:
            return e
    raise InputError(f"vertex {y} has no edge towards the end in the truncation")


@dataclass
class DisjointnessReport:
    disjoint: bool
    distance: Optional[int]
    margin: Fraction
    witness: Optional[Tuple[int, int, Tuple[int, ...], Tuple[int, ...]]]

    @property
    def ok(self) -> bool:
        return self.disjoint and self.distance is not None and self.distance >= self.margin

    def to_json_obj(self) -> dict:
        return {
            "disjoint": self.disjoint,
            "distance": self.distance,
            "margin": str(self.margin),
            "witness": None if self.witness is None else [self.witness[0], self.witness[1], list(self.witness[2]), list(self.witness[3])],
        }


def _horoball_vertices(pc: ProductComplex, spec: HoroballSpec) -> Set[Tuple[int, ...]]:
    reg = horoball(spec)
    return {tuple(c >> 1 for c in cell) for cell in pc.iter_cells(reg) if cell_dim(cell) == 0}


def _neighbours(pc: ProductComplex, vertex: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    for i, v in enumerate(vertex):
        t = pc.factors[i]
        nb = list(t.children(v))
        p = t.parent(v)
        if p is not None:
            nb.append(p)
        for u in nb:
            yield vertex[:i] + (u,) + vertex[i + 1:]


def check_disjointness(pc: ProductComplex, specs: Sequence[HoroballSpec], margin=0) -> DisjointnessReport:
    """Pairwise disjointness of closed horoballs and their 1-skeleton distance.

    The witness is (i, j, vertex of horoball i, vertex of horoball j) realising
    the minimum distance over all pairs; a shared vertex gives distance 0.
    """
    margin = Fraction(margin)
    if len(specs) < 2:
        raise InputError("need at least two horoballs")
    balls = [_horoball_vertices(pc, s) for s in specs]
    best: Optional[Tuple[int, int, int, Tuple[int, ...], Tuple[int, ...]]] = None
    for i in range(len(specs)):
        for j in range(i + 1, len(specs)):
            res = _set_distance(pc, balls[i], balls[j])
            if res is None:
                continue
            dist, a, b = res
            cand = (dist, i, j, a, b)
            if best is None or cand < best:
                best = cand
    if best is None:
        return DisjointnessReport(True, None, margin, None)
    dist, i, j, a, b = best
    return DisjointnessReport(dist > 0, dist, margin, (i, j, a, b))


def _set_distance(pc: ProductComplex, A: Set[Tuple[int, ...]], B: Set[Tuple[int, ...]]):
    if not A or not B:
        return None
    common = A & B
    if common:
        v = min(common)
        return 0, v, v
    # multi-source search from A; record the source of each visited vertex
    src = {v: v for v in A}
    frontier = sorted(A)
    dist = 0
    while frontier:
        dist += 1
        nxt = []
        hits = []
        for v in frontier:
            for u in _neighbours(pc, v):
                if u in src:
                    continue
                src[u] = src[v]
                nxt.append(u)
                if u in B:
                    hits.append((src[u], u))
        if hits:
            a, b = min(hits)
            return dist, a, b
        frontier = nxt
    return None
