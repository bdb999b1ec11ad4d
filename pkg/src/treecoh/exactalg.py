"""Exact sparse linear algebra over principal ideal domains.

Everything here works with Python integers, so no intermediate value can
overflow.  The central routine is :func:`smith`, a sparse Smith normal form
with an optional pair of unimodular transforms.  On top of it sit the
cohomology of two composable maps, induced maps on cohomology, submodule
calculus and purity tests.

>>> smith(SparseIntMatrix.from_dense([[2, 4], [6, 8]])).divisors
[2, 4]
>>> cohomology_at(SparseIntMatrix.from_dense([[2]]), SparseIntMatrix.zero(0, 1), ZZ)
ModuleDescriptor(free_rank=0, invariant_factors=(2,))
"""

from __future__ import annotations

import heapq
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import ContractViolation, InputError

Number = Union[int, Fraction]


# ---------------------------------------------------------------------------
# coefficient rings
# ---------------------------------------------------------------------------


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class CoefficientRing:
    """One of ℤ, ℚ, 𝔽_p or ℤ[1/p].

    Use the module-level constructors rather than building instances by hand.
    """

    kind: str
    p: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in ("Integers", "Rationals", "PrimeField", "IntegersAwayFrom"):
            raise InputError(f"unknown ring kind {self.kind!r}")
        needs_p = self.kind in ("PrimeField", "IntegersAwayFrom")
        if needs_p and (self.p is None or not _is_prime(self.p)):
            raise InputError(f"{self.kind} needs a prime p, got {self.p!r}")
        if not needs_p and self.p is not None:
            raise InputError(f"{self.kind} takes no prime")

    @property
    def is_field(self) -> bool:
        return self.kind in ("Rationals", "PrimeField")

    @property
    def modulus(self) -> Optional[int]:
        """Characteristic used for arithmetic, or None for characteristic zero."""
        return self.p if self.kind == "PrimeField" else None

    def is_unit(self, x: int) -> bool:
        if x == 0:
            return False
        if self.kind == "Integers":
            return abs(x) == 1
        if self.kind == "Rationals":
            return True
        if self.kind == "PrimeField":
            return x % self.p != 0
        return strip_prime(abs(x), self.p) == 1

    def clean_factor(self, d: int) -> int:
        """Map an integral invariant factor to its image in this ring (1 = unit)."""
        d = abs(d)
        if self.kind == "IntegersAwayFrom":
            return strip_prime(d, self.p)
        if self.is_field:
            return 1 if d else 0
        return d

    def __str__(self) -> str:
        return {
            "Integers": "Z",
            "Rationals": "Q",
            "PrimeField": f"F{self.p}",
            "IntegersAwayFrom": f"Z[1/{self.p}]",
        }[self.kind]

    @staticmethod
    def parse(text: str) -> "CoefficientRing":
        """Inverse of ``str``: accepts ``Z``, ``Q``, ``F<p>`` and ``Z[1/<p>]``."""
        t = text.strip()
        if t == "Z":
            return ZZ
        if t == "Q":
            return QQ
        try:
            if t.startswith("F"):
                return PrimeField(int(t[1:]))
            if t.startswith("Z[1/") and t.endswith("]"):
                return IntegersAwayFrom(int(t[4:-1]))
        except ValueError:
            pass
        raise InputError(f"cannot parse ring {text!r}")


def Integers() -> CoefficientRing:
    return CoefficientRing("Integers")


def Rationals() -> CoefficientRing:
    return CoefficientRing("Rationals")


def PrimeField(p: int) -> CoefficientRing:
    return CoefficientRing("PrimeField", p)


def IntegersAwayFrom(p: int) -> CoefficientRing:
    return CoefficientRing("IntegersAwayFrom", p)


ZZ = Integers()
QQ = Rationals()


def strip_prime(d: int, p: int) -> int:
    """Remove every factor p from d (d > 0)."""
    while d and d % p == 0:
        d //= p
    return d


# ---------------------------------------------------------------------------
# sparse matrices
# ---------------------------------------------------------------------------


class SparseIntMatrix:
    """Immutable sparse matrix with integer (or, for ℚ work, Fraction) entries.

    Zero entries are never stored.  Rows and columns are 0-indexed.
    """

    __slots__ = ("rows", "cols", "_entries", "_hash", "_col_index")

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Tuple[int, int], Number]] = None):
        if rows < 0 or cols < 0:
            raise InputError("negative matrix shape")
        clean: Dict[Tuple[int, int], Number] = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise InputError(f"entry ({i},{j}) outside {rows}x{cols}")
            if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
                raise InputError(f"entry ({i},{j}) is not an integer or Fraction: {v!r}")
            if isinstance(v, Fraction) and v.denominator == 1:
                v = v.numerator
            if v != 0:
                clean[(i, j)] = v
        self.rows = rows
        self.cols = cols
        self._entries = clean
        self._hash: Optional[int] = None
        self._col_index: Optional[List[Dict[int, Number]]] = None

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseIntMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "SparseIntMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def from_dense(cls, data: Sequence[Sequence[Number]], cols: Optional[int] = None) -> "SparseIntMatrix":
        rows = len(data)
        if cols is None:
            cols = len(data[0]) if rows else 0
        ent = {}
        for i, row in enumerate(data):
            if len(row) != cols:
                raise InputError("ragged dense matrix")
            for j, v in enumerate(row):
                if v:
                    ent[(i, j)] = v
        return cls(rows, cols, ent)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Dict[int, Number]]) -> "SparseIntMatrix":
        ent = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    ent[(i, j)] = v
        return cls(rows, len(columns), ent)

    # access ---------------------------------------------------------------
    @property
    def entries(self) -> Dict[Tuple[int, int], Number]:
        return dict(self._entries)

    def items(self) -> Iterator[Tuple[Tuple[int, int], Number]]:
        return iter(self._entries.items())

    @property
    def nnz(self) -> int:
        return len(self._entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, key: Tuple[int, int]) -> Number:
        return self._entries.get(key, 0)

    def is_zero(self) -> bool:
        return not self._entries

    def is_integral(self) -> bool:
        return all(isinstance(v, int) for v in self._entries.values())

    def to_dense(self) -> List[List[Number]]:
        out: List[List[Number]] = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    def column_dicts(self) -> List[Dict[int, Number]]:
        cols: List[Dict[int, Number]] = [dict() for _ in range(self.cols)]
        for (i, j), v in self._entries.items():
            cols[j][i] = v
        return cols

    def row_dicts(self) -> List[Dict[int, Number]]:
        rows: List[Dict[int, Number]] = [dict() for _ in range(self.rows)]
        for (i, j), v in self._entries.items():
            rows[i][j] = v
        return rows

    def _columns(self) -> List[Dict[int, Number]]:
        # built once; callers must not mutate the returned dicts
        if self._col_index is None:
            self._col_index = self.column_dicts()
        return self._col_index

    def column(self, j: int) -> Dict[int, Number]:
        return dict(self._columns()[j])

    # algebra ----------------------------------------------------------------
    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self._entries.items()})

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise InputError(f"shape mismatch {self.shape} @ {other.shape}")
        orows = other.row_dicts()
        acc: Dict[Tuple[int, int], Number] = {}
        for (i, k), a in self._entries.items():
            for j, b in orows[k].items():
                key = (i, j)
                acc[key] = acc.get(key, 0) + a * b
        return SparseIntMatrix(self.rows, other.cols, acc)

    def apply(self, vec: Dict[int, Number]) -> Dict[int, Number]:
        """Multiply by a sparse column vector given as {index: value}."""
        out: Dict[int, Number] = {}
        cols = self._columns()
        for j, x in vec.items():
            for i, a in cols[j].items():
                out[i] = out.get(i, 0) + a * x
        return {i: v for i, v in out.items() if v}

    def __add__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.shape != other.shape:
            raise InputError("shape mismatch in addition")
        acc = dict(self._entries)
        for k, v in other._entries.items():
            acc[k] = acc.get(k, 0) + v
        return SparseIntMatrix(self.rows, self.cols, acc)

    def __neg__(self) -> "SparseIntMatrix":
        return SparseIntMatrix(self.rows, self.cols, {k: -v for k, v in self._entries.items()})

    def __sub__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        return self + (-other)

    def scale(self, c: Number) -> "SparseIntMatrix":
        return SparseIntMatrix(self.rows, self.cols, {k: c * v for k, v in self._entries.items()})

    def reduce_mod(self, p: int) -> "SparseIntMatrix":
        out = {}
        for k, v in self._entries.items():
            if isinstance(v, Fraction):
                v = v.numerator * pow(v.denominator, -1, p)
            out[k] = v % p
        return SparseIntMatrix(self.rows, self.cols, out)

    def hstack(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.rows != other.rows:
            raise InputError("row mismatch in hstack")
        ent = dict(self._entries)
        for (i, j), v in other._entries.items():
            ent[(i, j + self.cols)] = v
        return SparseIntMatrix(self.rows, self.cols + other.cols, ent)

    def vstack(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.cols:
            raise InputError("column mismatch in vstack")
        ent = dict(self._entries)
        for (i, j), v in other._entries.items():
            ent[(i + self.rows, j)] = v
        return SparseIntMatrix(self.rows + other.rows, self.cols, ent)

    def select(self, rows: Optional[Sequence[int]] = None, cols: Optional[Sequence[int]] = None) -> "SparseIntMatrix":
        """Submatrix on the given (ordered) row and column index lists."""
        rmap = {r: k for k, r in enumerate(rows)} if rows is not None else None
        cmap = {c: k for k, c in enumerate(cols)} if cols is not None else None
        ent = {}
        for (i, j), v in self._entries.items():
            ii = i if rmap is None else rmap.get(i)
            jj = j if cmap is None else cmap.get(j)
            if ii is not None and jj is not None:
                ent[(ii, jj)] = v
        return SparseIntMatrix(
            self.rows if rows is None else len(rows), self.cols if cols is None else len(cols), ent
        )

    # comparison / serialisation ---------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseIntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, frozenset(self._entries.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def to_json_obj(self) -> dict:
        ent = []
        for (i, j), v in sorted(self._entries.items()):
            ent.append([i, j, v if isinstance(v, int) else f"{v.numerator}/{v.denominator}"])
        return {"rows": self.rows, "cols": self.cols, "entries": ent}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SparseIntMatrix":
        try:
            ent: Dict[Tuple[int, int], Number] = {}
            for i, j, v in obj["entries"]:
                if isinstance(v, str):
                    v = Fraction(v)
                if (int(i), int(j)) in ent:
                    raise InputError(f"duplicate entry ({i},{j})")
                ent[(int(i), int(j))] = v
            return cls(int(obj["rows"]), int(obj["cols"]), ent)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed matrix JSON: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "SparseIntMatrix":
        return cls.from_json_obj(json.loads(text))


def _sparse_from_rows(rows: Dict[int, Dict[int, int]], nrows: int, ncols: int) -> SparseIntMatrix:
    ent = {(i, j): v for i, row in rows.items() for j, v in row.items()}
    return SparseIntMatrix(nrows, ncols, ent)


def _sparse_from_cols(cols: Dict[int, Dict[int, int]], nrows: int, ncols: int) -> SparseIntMatrix:
    ent = {(i, j): v for j, col in cols.items() for i, v in col.items()}
    return SparseIntMatrix(nrows, ncols, ent)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass
class SmithDecomposition:
    """Invariant factors of A, plus unimodular U, V with U·A·V = diag(divisors) on request.

    ``divisors`` holds only the nonzero invariant factors in divisibility
    order; ``rank == len(divisors)``.  The inverses are kept because nearly
    every consumer (basis lifts, coordinates) needs them.
    """

    divisors: List[int]
    rows: int
    cols: int
    left: Optional[SparseIntMatrix] = None
    right: Optional[SparseIntMatrix] = None
    left_inverse: Optional[SparseIntMatrix] = None
    right_inverse: Optional[SparseIntMatrix] = None
    modulus: Optional[int] = None

    @property
    def rank(self) -> int:
        return len(self.divisors)

    def diagonal(self) -> SparseIntMatrix:
        return SparseIntMatrix(self.rows, self.cols, {(i, i): d for i, d in enumerate(self.divisors)})


def _inv_mod(a: int, m: int) -> int:
    return pow(a % m, -1, m)


class _Reducer:
    """Sparse pivoting engine shared by every SNF call.

    The active matrix is kept as row dictionaries plus a column → row-set
    index.  Pivots are taken in order of (|value|, Markowitz fill-in
    estimate, row, col); estimates are refreshed lazily, which keeps the
    selection deterministic without rescanning the whole matrix each step.
    """

    def __init__(self, A: SparseIntMatrix, modulus: Optional[int], track: bool,
                 pivot_rows: Optional[set] = None):
        self.m = modulus
        self.allowed = pivot_rows
        self.nrows, self.ncols = A.rows, A.cols
        self.rows: Dict[int, Dict[int, int]] = {}
        self.colidx: Dict[int, set] = {}
        for (i, j), v in A.items():
            if isinstance(v, Fraction):
                raise InputError("smith needs integral entries")
            if self.m is not None:
                v %= self.m
                if not v:
                    continue
            self.rows.setdefault(i, {})[j] = v
            self.colidx.setdefault(j, set()).add(i)
        self.track = track
        if track:
            self.U = {i: {i: 1} for i in range(self.nrows)}
            self.Uinv = {i: {i: 1} for i in range(self.nrows)}  # columns
            self.V = {j: {j: 1} for j in range(self.ncols)}  # columns
            self.Vinv = {j: {j: 1} for j in range(self.ncols)}  # rows
        self.pivots: List[Tuple[int, int, int]] = []
        self.heap: List[Tuple[int, int, int, int]] = []
        for i, row in self.rows.items():
            for j, v in row.items():
                self._push(i, j, v)

    # helpers ---------------------------------------------------------------
    def _key(self, v: int) -> int:
        if self.m is not None:
            return 1
        return abs(v)

    def _cost(self, i: int, j: int) -> int:
        return (len(self.rows[i]) - 1) * (len(self.colidx[j]) - 1)

    def _push(self, i: int, j: int, v: int) -> None:
        if self.allowed is not None and i not in self.allowed:
            return
        heapq.heappush(self.heap, (self._key(v), self._cost(i, j), i, j))

    def _norm(self, v: int) -> int:
        return v % self.m if self.m is not None else v

    @staticmethod
    def _axpy(target: Dict[int, int], src: Dict[int, int], q: int, m: Optional[int]) -> None:
        """target -= q * src, dropping zeros."""
        for k, s in src.items():
            nv = target.get(k, 0) - q * s
            if m is not None:
                nv %= m
            if nv:
                target[k] = nv
            else:
                target.pop(k, None)

    def _row_op(self, dst: int, src: int, q: int) -> None:
        """row[dst] -= q * row[src] in the active matrix and in U."""
        m = self.m
        drow = self.rows.setdefault(dst, {})
        for k, s in self.rows[src].items():
            nv = drow.get(k, 0) - q * s
            if m is not None:
                nv %= m
            if nv:
                if k not in drow:
                    self.colidx[k].add(dst)
                drow[k] = nv
            else:
                if k in drow:
                    del drow[k]
                    self.colidx[k].discard(dst)
        if not drow:
            del self.rows[dst]
        else:
            for k in self.rows[src]:
                if k in drow:
                    self._push(dst, k, drow[k])
        if self.track:
            self._axpy(self.U[dst], self.U[src], q, m)
            # U^{-1}: column src += q * column dst
            self._axpy(self.Uinv[src], self.Uinv[dst], -q, m)

    def _col_op(self, dst: int, src: int, q: int) -> None:
        """col[dst] -= q * col[src] in the active matrix and in V."""
        m = self.m
        for i in list(self.colidx.get(src, ())):
            row = self.rows[i]
            nv = row.get(dst, 0) - q * row[src]
            if m is not None:
                nv %= m
            if nv:
                if dst not in row:
                    self.colidx.setdefault(dst, set()).add(i)
                row[dst] = nv
                self._push(i, dst, nv)
            elif dst in row:
                del row[dst]
                self.colidx[dst].discard(i)
        if self.track:
            self._axpy(self.V[dst], self.V[src], q, m)
            self._axpy(self.Vinv[src], self.Vinv[dst], -q, m)

    def _select(self) -> Optional[Tuple[int, int]]:
        heap = self.heap
        while heap:
            key, cost, i, j = heapq.heappop(heap)
            row = self.rows.get(i)
            if row is None or j not in row or self._key(row[j]) != key:
                continue
            cur = self._cost(i, j)
            if cur > cost:
                heapq.heappush(heap, (key, cur, i, j))
                continue
            return i, j
        return None

    # main loop ---------------------------------------------------------------
    def run(self) -> None:
        m = self.m
        while True:
            sel = self._select()
            if sel is None:
                break
            i, j = sel
            p = self.rows[i][j]
            pinv = _inv_mod(p, m) if m is not None else None
            unit = m is not None or p in (1, -1)
            # clear column j below/above the pivot with row operations
            for r in sorted(self.colidx[j] - {i}):
                a = self.rows[r][j]
                q = (a * pinv) % m if m is not None else a // p
                self._row_op(r, i, q)
            # clear row i with column operations; with a unit pivot and an
            # already-cleared column these touch nothing but row i itself
            if unit and not self.track and self.colidx[j] == {i}:
                for c in self.rows[i]:
                    if c != j:
                        self.colidx[c].discard(i)
                self.rows[i] = {j: p}
            elif self.track or len(self.rows[i]) > 1:
                for c in sorted(k for k in self.rows[i] if k != j):
                    a = self.rows[i][c]
                    q = (a * pinv) % m if m is not None else a // p
                    self._col_op(c, j, q)
            if len(self.rows[i]) == 1 and self.colidx[j] == {i}:
                self.pivots.append((i, j, p))
                del self.rows[i]
                del self.colidx[j]
            elif i in self.rows and j in self.rows[i]:
                # smaller remainders exist and will be picked next; keep p in play
                self._push(i, j, self.rows[i][j])

    # finishing -------------------------------------------------------------
    def _scale_row(self, i: int, c: int) -> None:
        """Multiply row i of U by unit c (and fix U^{-1})."""
        m = self.m
        U = self.U[i]
        for k in U:
            U[k] = self._norm(U[k] * c)
        cinv = _inv_mod(c, m) if m is not None else c  # c = ±1 over ℤ
        col = self.Uinv[i]
        for k in col:
            col[k] = self._norm(col[k] * cinv)

    def finish(self) -> SmithDecomposition:
        m = self.m
        piv = self.pivots
        diag = [p for (_, _, p) in piv]
        # positive / normalised pivots
        for k, (i, j, p) in enumerate(piv):
            if m is not None:
                if p != 1:
                    if self.track:
                        self._scale_row(i, _inv_mod(p, m))
                    diag[k] = 1
            elif p < 0:
                if self.track:
                    self._scale_row(i, -1)
                diag[k] = -p
        if m is None:
            self._fix_divisibility(diag)
        order = sorted(range(len(piv)), key=lambda k: (diag[k], k))
        divisors = [diag[k] for k in order]
        dec = SmithDecomposition(divisors, self.nrows, self.ncols, modulus=m)
        if self.track:
            prow = [piv[k][0] for k in order]
            pcol = [piv[k][1] for k in order]
            used_r, used_c = set(prow), set(pcol)
            rperm = prow + [i for i in range(self.nrows) if i not in used_r]
            cperm = pcol + [j for j in range(self.ncols) if j not in used_c]
            U = {new: self.U[old] for new, old in enumerate(rperm)}
            Uinv = {new: self.Uinv[old] for new, old in enumerate(rperm)}
            V = {new: self.V[old] for new, old in enumerate(cperm)}
            Vinv = {new: self.Vinv[old] for new, old in enumerate(cperm)}
            dec.left = _sparse_from_rows(U, self.nrows, self.nrows)
            dec.left_inverse = _sparse_from_cols(Uinv, self.nrows, self.nrows)
            dec.right = _sparse_from_cols(V, self.ncols, self.ncols)
            dec.right_inverse = _sparse_from_rows(Vinv, self.ncols, self.ncols)
        return dec

    def _fix_divisibility(self, diag: List[int]) -> None:
        """Turn the pivot diagonal into a divisibility chain with 2x2 unimodular moves."""
        piv = self.pivots
        idx = [k for k, d in enumerate(diag) if d != 1]
        for a_pos in range(len(idx)):
            for b_pos in range(a_pos + 1, len(idx)):
                ka, kb = idx[a_pos], idx[b_pos]
                a, b = diag[ka], diag[kb]
                if b % a == 0:
                    continue
                g, s, t = _xgcd(a, b)
                diag[ka], diag[kb] = g, a * b // g
                if not self.track:
                    continue
                ri, ci = piv[ka][0], piv[ka][1]
                rj, cj = piv[kb][0], piv[kb][1]
                ag, bg = a // g, b // g
                Ui, Uj = self.U[ri], self.U[rj]
                self.U[ri] = _lin(Ui, s, Uj, t)
                self.U[rj] = _lin(Ui, -bg, Uj, ag)
                Ci, Cj = self.Uinv[ri], self.Uinv[rj]
                self.Uinv[ri] = _lin(Ci, ag, Cj, bg)
                self.Uinv[rj] = _lin(Ci, -t, Cj, s)
                Vi, Vj = self.V[ci], self.V[cj]
                self.V[ci] = _lin(Vi, 1, Vj, 1)
                self.V[cj] = _lin(Vi, -t * bg, Vj, s * ag)
                Wi, Wj = self.Vinv[ci], self.Vinv[cj]
                self.Vinv[ci] = _lin(Wi, s * ag, Wj, t * bg)
                self.Vinv[cj] = _lin(Wi, -1, Wj, 1)


def _lin(x: Dict[int, int], a: int, y: Dict[int, int], b: int) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for k, v in x.items():
        out[k] = a * v
    for k, v in y.items():
        out[k] = out.get(k, 0) + b * v
    return {k: v for k, v in out.items() if v}


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, s, t) with g = gcd(a, b) = s*a + t*b, g > 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def smith(A: SparseIntMatrix, transforms: bool = False, modulus: Optional[int] = None) -> SmithDecomposition:
    """Smith normal form of an integral sparse matrix.

    With ``modulus=p`` the computation runs over 𝔽_p (every nonzero pivot is
    a unit, so all divisors are 1 and only the rank carries information).
    With ``transforms=True`` the decomposition also carries U, V and their
    inverses with ``U @ A @ V == diag(divisors)``.
    """
    if not isinstance(A, SparseIntMatrix):
        raise InputError("smith expects a SparseIntMatrix")
    if not A.is_integral():
        raise InputError("smith needs integral entries")
    red = _Reducer(A, modulus, transforms)
    red.run()
    return red.finish()


def _bareiss_det(m: List[List[int]]) -> int:
    n = len(m)
    a = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def _bareiss_rank(m: List[List[int]]) -> int:
    a = [row[:] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    r, prev = 0, 1
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
    return r


def _pivots(m: List[List[int]], p: Optional[int]) -> Tuple[List[int], List[int]]:
    """Pivot rows and columns of row-echelon elimination over F_p (or Q when p is None).

    The k x k submatrix on the first k pivot rows and columns is invertible
    over that field for every k up to the rank.
    """
    a = [[x % p for x in row] if p else list(row) for row in m]
    order = list(range(len(a)))
    cols = len(a[0]) if a else 0
    r, prev = 0, 1
    prow, pcol = [], []
    for c in range(cols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        order[r], order[piv] = order[piv], order[r]
        for i in range(r + 1, len(a)):
            if p:
                f = a[i][c] * pow(a[r][c], -1, p) % p
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
            else:
                for j in range(c + 1, cols):
                    a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
                a[i][c] = 0
        if not p:
            prev = a[r][c]
        prow.append(order[r])
        pcol.append(c)
        r += 1
    return prow, pcol


def _small_factor(n: int, limit: int = 10 ** 5) -> Optional[Dict[int, int]]:
    """Prime factorisation by trial division, or None when a factor above ``limit`` may remain."""
    out: Dict[int, int] = {}
    p = 2
    while p * p <= n:
        if p > limit:
            return None
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _val(n: int, p: int) -> int:
    e = 0
    while n and n % p == 0:
        n //= p
        e += 1
    return e


def minor_divisors(A: SparseIntMatrix) -> List[int]:
    """Invariant factors from gcds of k x k minors, independent of :func:`smith`.

    For each k the running gcd g of evaluated k x k minors is a multiple of
    g_k, and it is exact once it meets a proven lower bound: per prime p,
    v_p(g_k) >= v_p(g_{k-1}) + max(v_p(d_{k-1}), [k > rank over F_p]).
    Minors are picked first from elimination pivots over Q and over F_p for
    each prime of g (a minor that is a unit mod p), then by exhaustive
    enumeration if the bound is still not met.
    """
    from itertools import combinations

    rows = sorted({i for (i, _), _v in A.items()})
    cols = sorted({j for (_, j), _v in A.items()})
    if not rows:
        return []
    dense = [[A[i, j] for j in cols] for i in rows]
    if any(isinstance(x, Fraction) for r in dense for x in r):
        raise InputError("minor_divisors needs integral entries")
    piv: Dict[Optional[int], Tuple[List[int], List[int]]] = {None: _pivots(dense, None)}
    r = len(piv[None][0])
    g_prev, d_prev = 1, 1
    out: List[int] = []

    def minor(rs, cs) -> int:
        return _bareiss_det([[dense[i][c] for c in cs] for i in rs])

    for k in range(1, r + 1):

        def status(g: int):
            """(bound met, primes whose exponent in g exceeds the floor); None when g is unfactored."""
            fac = _small_factor(g)
            if fac is None:
                return None
            excess = []
            for p, e in fac.items():
                if p not in piv:
                    piv[p] = _pivots(dense, p)
                need = _val(g_prev, p) + max(_val(d_prev, p), 1 if k > len(piv[p][0]) else 0)
                if e > need:
                    excess.append((p, need))
            return excess

        rs, cs = piv[None]
        g = abs(minor(rs[:k], cs[:k]))
        tried = set()
        while True:
            st = status(g)
            if st == []:
                break
            fresh = [p for p, need in (st or []) if need == 0 and len(piv[p][0]) >= k and p not in tried]
            if not fresh:
                break
            for p in fresh:
                tried.add(p)
                prs, pcs = piv[p]
                g = gcd(g, minor(prs[:k], pcs[:k]))
        if status(g) != []:
            for rs_ in combinations(range(len(rows)), k):
                for cs_ in combinations(range(len(cols)), k):
                    new = gcd(g, minor(rs_, cs_))
                    if new != g:
                        g = new
                        if status(g) == []:
                            break
                else:
                    continue
                break
        out.append(g // g_prev)
        g_prev, d_prev = g, g // g_prev
    return out


def clear_denominators(A: SparseIntMatrix, axis: str = "rows") -> SparseIntMatrix:
    """Scale each row (kernel preserved) or each column (ℚ-image preserved) to integers."""
    if A.is_integral():
        return A
    lines = A.row_dicts() if axis == "rows" else A.column_dicts()
    ent = {}
    for a, line in enumerate(lines):
        den = 1
        for v in line.values():
            if isinstance(v, Fraction):
                den = den * v.denominator // gcd(den, v.denominator)
        for b, v in line.items():
            ent[(a, b) if axis == "rows" else (b, a)] = int(v * den)
    return SparseIntMatrix(A.rows, A.cols, ent)


def _ring_smith(A: SparseIntMatrix, ring: CoefficientRing, transforms: bool = False) -> SmithDecomposition:
    if ring.kind == "PrimeField":
        return smith(A.reduce_mod(ring.p), transforms=transforms, modulus=ring.p)
    if not A.is_integral():
        if ring.kind != "Rationals":
            raise InputError(f"fractional entries need ring Q, got {ring}")
        A = clear_denominators(A)
    return smith(A, transforms=transforms)


def rank(A: SparseIntMatrix, ring: CoefficientRing = QQ) -> int:
    return _ring_smith(A, ring).rank


# ---------------------------------------------------------------------------
# module descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModuleDescriptor:
    """Isomorphism type R^free_rank ⊕ ⨁ R/(d) of a finitely generated module."""

    free_rank: int = 0
    invariant_factors: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.free_rank < 0:
            raise InputError("negative free rank")
        fs = tuple(sorted(self.invariant_factors))
        if any(f <= 1 for f in fs):
            raise InputError("invariant factors must exceed 1")
        for a, b in zip(fs, fs[1:]):
            if b % a:
                raise InputError(f"invariant factors {fs} are not a divisibility chain")
        object.__setattr__(self, "invariant_factors", fs)

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.invariant_factors

    @classmethod
    def from_divisors(cls, free_rank: int, divisors: Iterable[int], ring: CoefficientRing) -> "ModuleDescriptor":
        fs = [ring.clean_factor(d) for d in divisors]
        return cls(free_rank, tuple(f for f in fs if f > 1))

    def to_json_obj(self) -> dict:
        return {"free_rank": self.free_rank, "invariant_factors": list(self.invariant_factors)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ModuleDescriptor":
        return cls(int(obj["free_rank"]), tuple(int(x) for x in obj["invariant_factors"]))

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append(f"R^{self.free_rank}")
        parts += [f"R/{d}" for d in self.invariant_factors]
        return " + ".join(parts) if parts else "0"


def _check_composable(d_in: SparseIntMatrix, d_out: SparseIntMatrix) -> None:
    if d_out.cols != d_in.rows:
        raise InputError(f"maps do not compose: {d_in.shape} then {d_out.shape}")


def _check_complex(d_in: SparseIntMatrix, d_out: SparseIntMatrix, ring: CoefficientRing) -> None:
    _check_composable(d_in, d_out)
    comp = d_out @ d_in
    if ring.kind == "PrimeField":
        comp = comp.reduce_mod(ring.p)
    if not comp.is_zero():
        raise ContractViolation("d_out ∘ d_in is not zero")


def cohomology_at(d_in: SparseIntMatrix, d_out: SparseIntMatrix, ring: CoefficientRing = ZZ,
                  check: bool = True) -> ModuleDescriptor:
    """ker(d_out) / im(d_in) over ``ring``.

    The torsion of the quotient equals the torsion of R^n / im(d_in) because
    ker(d_out) is saturated, so only the divisors of d_in and the rank of
    d_out are needed.  Each ring is computed natively; nothing is converted
    between characteristics.
    """
    if check:
        _check_complex(d_in, d_out, ring)
    else:
        _check_composable(d_in, d_out)
    n = d_in.rows
    s_in = _ring_smith(d_in, ring)
    s_out = _ring_smith(d_out, ring)
    free = n - s_in.rank - s_out.rank
    return ModuleDescriptor.from_divisors(free, s_in.divisors, ring)


# ---------------------------------------------------------------------------
# bases of cohomology and induced maps
# ---------------------------------------------------------------------------


def _vec_mod(vec: Dict[int, int], m: Optional[int]) -> Dict[int, int]:
    if m is None:
        return {k: v for k, v in vec.items() if v}
    out = {}
    for k, v in vec.items():
        if isinstance(v, Fraction):
            v = v.numerator * pow(v.denominator, -1, m)
        v %= m
        if v:
            out[k] = v
    return out


@dataclass
class CohomologyBasis:
    """Chosen generators of ker(d_out)/im(d_in) together with a coordinate map.

    ``torsion_orders[k]`` is the order of generator k for the first
    ``len(torsion_orders)`` generators; the remaining generators are free.
    """

    ring: CoefficientRing
    d_in: SparseIntMatrix
    d_out: SparseIntMatrix
    torsion_orders: List[int]
    generators: List[Dict[int, int]]
    _left: SparseIntMatrix = field(repr=False, default=None)
    _split: int = 0
    _torsion_rows: List[int] = field(repr=False, default_factory=list)
    _free_left: Optional[SparseIntMatrix] = field(repr=False, default=None)
    _free_offset: int = 0

    @property
    def descriptor(self) -> ModuleDescriptor:
        return ModuleDescriptor(len(self.generators) - len(self.torsion_orders), tuple(self.torsion_orders))

    @property
    def dim(self) -> int:
        return len(self.generators)

    def coordinates(self, cocycle: Dict[int, int]) -> List[int]:
        """Coordinates of a cocycle's class (torsion coordinates reduced mod their order)."""
        m = self.ring.modulus
        v = _vec_mod(dict(cocycle), m)
        if self.d_out.nnz and _vec_mod(self.d_out.apply(v), m):
            raise ContractViolation("vector is not a cocycle")
        y = _vec_mod(self._left.apply(v), m)
        coords = []
        for order, r in zip(self.torsion_orders, self._torsion_rows):
            coords.append(y.get(r, 0) % order)
        tail = {k - self._split: x for k, x in y.items() if k >= self._split}
        if self._free_left is not None:
            z = _vec_mod(self._free_left.apply(tail), m)
            nfree = self.dim - len(self.torsion_orders)
            coords += [z.get(self._free_offset + k, 0) for k in range(nfree)]
        if self.ring.kind == "Rationals":
            pass
        return coords

    def is_coboundary(self, cocycle: Dict[int, int]) -> bool:
        return not any(self.coordinates(cocycle))


def cohomology_basis(d_in: SparseIntMatrix, d_out: SparseIntMatrix, ring: CoefficientRing = ZZ) -> CohomologyBasis:
    """Representatives and coordinates for ker(d_out)/im(d_in).

    With U·d_in·V = D the cochain space splits in y = U x coordinates into
    the pivot block (torsion) and a tail on which the cocycle condition is
    a second SNF problem whose right transform yields the free generators.
    """
    _check_complex(d_in, d_out, ring)
    m = ring.modulus
    din = d_in if ring.kind != "Rationals" else clear_denominators(d_in, axis="cols")
    dout = d_out if ring.kind != "Rationals" else clear_denominators(d_out)
    s1 = _ring_smith(din, ring, transforms=True)
    r = s1.rank
    n = d_in.rows
    Uinv_cols = s1.left_inverse.column_dicts()
    torsion_orders, torsion_rows, gens = [], [], []
    for k, dk in enumerate(s1.divisors):
        f = ring.clean_factor(dk)
        if f > 1:
            torsion_orders.append(f)
            torsion_rows.append(k)
            gens.append(_vec_mod(Uinv_cols[k], m))
    # cocycle condition on the tail block: M' = d_out · U^{-1}[:, r:]
    tail_cols = list(range(r, n))
    Mfull = dout @ s1.left_inverse if dout.rows else SparseIntMatrix.zero(0, n)
    if m is not None:
        Mfull = Mfull.reduce_mod(m)
    Mtail = Mfull.select(cols=tail_cols)
    s2 = _ring_smith(Mtail, ring, transforms=True)
    k2 = s2.rank
    Vcols = s2.right.column_dicts()
    for c in range(k2, len(tail_cols)):
        # lift kernel vector back to cochains: x = U^{-1} (0 ⊕ v)
        vec: Dict[int, int] = {}
        for t, val in Vcols[c].items():
            for i, u in Uinv_cols[r + t].items():
                vec[i] = vec.get(i, 0) + u * val
        gens.append(_vec_mod(vec, m))
    basis = CohomologyBasis(ring, d_in, d_out, torsion_orders, gens)
    basis._left = s1.left
    basis._split = r
    basis._torsion_rows = torsion_rows
    basis._free_left = s2.right_inverse
    basis._free_offset = k2
    return basis


def induced_map(src: CohomologyBasis, dst: CohomologyBasis, chain_map: SparseIntMatrix,
                ring: Optional[CoefficientRing] = None) -> SparseIntMatrix:
    """Matrix of the map on cohomology induced by a degree-preserving cochain map.

    Columns index the generators of ``src``, rows those of ``dst``.  The
    chain map must send cocycles to cocycles and coboundaries to coboundaries;
    both are checked.
    """
    ring = ring or src.ring
    m = ring.modulus
    if chain_map.cols != src.d_in.rows or chain_map.rows != dst.d_in.rows:
        raise InputError("chain map shape does not match the complexes")
    for j in range(src.d_in.cols):
        col = src.d_in.column(j)
        img = _vec_mod(chain_map.apply(col), m)
        if img and (_vec_mod(dst.d_out.apply(img), m) or not dst.is_coboundary(img)):
            raise ContractViolation("chain map does not preserve coboundaries")
    out: Dict[Tuple[int, int], int] = {}
    for j, g in enumerate(src.generators):
        img = _vec_mod(chain_map.apply(g), m)
        if dst.d_out.nnz and _vec_mod(dst.d_out.apply(img), m):
            raise ContractViolation("chain map does not commute with the coboundary")
        for i, c in enumerate(dst.coordinates(img)):
            if c:
                out[(i, j)] = c
    return SparseIntMatrix(dst.dim, src.dim, out)


# ---------------------------------------------------------------------------
# submodules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Submodule:
    """Span of the columns of ``generators`` inside R^ambient_rank."""

    ambient_rank: int
    generators: SparseIntMatrix
    ring: CoefficientRing = ZZ

    def __post_init__(self) -> None:
        if self.generators.rows != self.ambient_rank:
            raise InputError("generator rows must equal the ambient rank")

    @classmethod
    def span(cls, ambient_rank: int, vectors: Sequence[Dict[int, int]], ring: CoefficientRing = ZZ) -> "Submodule":
        return cls(ambient_rank, SparseIntMatrix.from_columns(ambient_rank, list(vectors)), ring)

    @classmethod
    def zero(cls, ambient_rank: int, ring: CoefficientRing = ZZ) -> "Submodule":
        return cls(ambient_rank, SparseIntMatrix.zero(ambient_rank, 0), ring)

    @property
    def rank(self) -> int:
        return _ring_smith(self.generators, self.ring).rank

    def basis(self) -> "Submodule":
        """An equivalent generating set with exactly ``rank`` columns."""
        s = _ring_smith(self.generators, self.ring, transforms=True)
        cols = s.left_inverse.column_dicts()
        vecs = []
        for k, d in enumerate(s.divisors):
            f = self.ring.clean_factor(d)
            vecs.append(_vec_mod({i: v * (f if not self.ring.is_field else 1) for i, v in cols[k].items()},
                                 self.ring.modulus))
        return Submodule.span(self.ambient_rank, vecs, self.ring)

    def quotient_descriptor(self) -> ModuleDescriptor:
        s = _ring_smith(self.generators, self.ring)
        return ModuleDescriptor.from_divisors(self.ambient_rank - s.rank, s.divisors, self.ring)

    def contains(self, vector: Dict[int, int]) -> bool:
        return submodule_ops(self, None, "membership", vector)

    def lattice_data(self) -> Tuple[int, int]:
        """(rank, covolume) where covolume is the product of the non-unit invariant factors."""
        if self.generators.nnz == 0:
            return 0, 1
        s = _ring_smith(self.generators, self.ring)
        vol = 1
        for d in s.divisors:
            vol *= self.ring.clean_factor(d)
        return s.rank, vol

    def contains_module(self, other: "Submodule") -> bool:
        """other ⊆ self, decided by comparing self with self + other.

        Both have the same saturation exactly when the ranks agree, and then
        self ⊆ self + other is an equality iff the covolumes agree.
        """
        if other.ambient_rank != self.ambient_rank:
            raise InputError("ambient ranks differ")
        if other.generators.nnz == 0:
            return True
        total = Submodule(self.ambient_rank, self.generators.hstack(other.generators), self.ring)
        return self.lattice_data() == total.lattice_data()

    def equals(self, other: "Submodule") -> bool:
        return self.contains_module(other) and other.contains_module(self)


def _membership(s: Submodule, vector: Dict[int, int]) -> bool:
    ring = s.ring
    m = ring.modulus
    v = _vec_mod(dict(vector), m)
    if not v:
        return True
    if any(not (0 <= k < s.ambient_rank) for k in v):
        raise InputError("vector index outside the ambient module")
    gens = s.generators
    if ring.kind == "Rationals":
        gens = clear_denominators(gens, axis="cols")
        den = 1
        for x in v.values():
            if isinstance(x, Fraction):
                den = den * x.denominator // gcd(den, x.denominator)
        v = {k: int(x * den) for k, x in v.items()}
    if gens.cols == 0:
        return False
    sd = _ring_smith(gens, ring, transforms=True)
    y = _vec_mod(sd.left.apply(v), m)
    for k, val in y.items():
        if k >= sd.rank:
            return False
        if ring.is_field:
            continue
        dk = sd.divisors[k]
        if ring.kind == "IntegersAwayFrom":
            dk = strip_prime(dk, ring.p)
        if val % dk:
            return False
    return True


def _kernel_basis(A: SparseIntMatrix, ring: CoefficientRing) -> List[Dict[int, int]]:
    s = _ring_smith(A if ring.kind != "Rationals" else clear_denominators(A), ring, transforms=True)
    cols = s.right.column_dicts()
    return [_vec_mod(cols[c], ring.modulus) for c in range(s.rank, A.cols)]


def kernel_basis(A: SparseIntMatrix, ring: CoefficientRing = ZZ) -> List[Dict[int, int]]:
    """A basis of ker(A) (saturated over ℤ-like rings)."""
    return _kernel_basis(A, ring)


def image_slice(A: SparseIntMatrix, keep: Sequence[int]) -> List[Dict[int, int]]:
    """Generators of im(A) ∩ span{e_i : i in keep} over ℤ, indexed by position in ``keep``.

    Pivots are restricted to rows outside ``keep``; the Schur complement on
    the kept rows then spans the slice.  Rows outside ``keep`` that survive
    with non-unit entries are handled by an explicit kernel computation.
    """
    keep_pos = {r: k for k, r in enumerate(keep)}
    others = set(range(A.rows)) - set(keep_pos)
    red = _Reducer(A, None, False, pivot_rows=others)
    red.run()
    leftover: Dict[int, Dict[int, int]] = {}
    kept: Dict[int, Dict[int, int]] = {}
    for i, row in red.rows.items():
        target = kept if i in keep_pos else leftover
        for j, v in row.items():
            target.setdefault(j, {})[keep_pos.get(i, i)] = v
    if not any(leftover.values()):
        gens = [kept[j] for j in sorted(kept)]
        return [g for g in gens if g]
    cols = sorted(set(kept) | set(leftover))
    pos = {j: k for k, j in enumerate(cols)}
    other_rows = sorted({i for col in leftover.values() for i in col})
    rpos = {i: k for k, i in enumerate(other_rows)}
    block = SparseIntMatrix(len(other_rows), len(cols),
                            {(rpos[i], pos[j]): v for j, col in leftover.items() for i, v in col.items()})
    out = []
    for vec in _kernel_basis(block, ZZ):
        acc: Dict[int, int] = {}
        for k, c in vec.items():
            for r, v in kept.get(cols[k], {}).items():
                acc[r] = acc.get(r, 0) + c * v
        acc = {r: v for r, v in acc.items() if v}
        if acc:
            out.append(acc)
    return out


def submodule_ops(a: Submodule, b: Optional[Submodule], op: str,
                  vector: Optional[Dict[int, int]] = None) -> Union[Submodule, bool]:
    """Sum, intersection or membership test for submodules of a free module.

    ``op`` is ``"sum"``, ``"intersection"`` or ``"membership"``; membership
    tests ``vector`` against ``a`` and ignores ``b``.
    """
    if op == "membership":
        if vector is None:
            raise InputError("membership needs a vector")
        return _membership(a, vector)
    if b is None:
        raise InputError(f"{op} needs two submodules")
    if a.ambient_rank != b.ambient_rank:
        raise InputError("ambient ranks differ")
    if a.ring != b.ring:
        raise InputError("rings differ")
    ring = a.ring
    if op == "sum":
        return Submodule(a.ambient_rank, a.generators.hstack(b.generators), ring)
    if op == "intersection":
        if a.generators.cols == 0 or b.generators.cols == 0:
            return Submodule.zero(a.ambient_rank, ring)
        stacked = a.generators.hstack(-b.generators)
        vecs = []
        for kv in _kernel_basis(stacked, ring):
            xa = {k: v for k, v in kv.items() if k < a.generators.cols}
            img = _vec_mod(a.generators.apply(xa), ring.modulus)
            if img:
                vecs.append(img)
        return Submodule.span(a.ambient_rank, vecs, ring)
    raise InputError(f"unknown submodule op {op!r}")


def purity_check(s: Submodule) -> bool:
    """True iff R^n / s is torsion-free, i.e. every nonzero divisor is a unit."""
    if s.ring.is_field:
        warnings.warn("purity over a field is automatic", stacklevel=2)
        return True
    sd = _ring_smith(s.generators, s.ring)
    return all(s.ring.is_unit(d) for d in sd.divisors)
