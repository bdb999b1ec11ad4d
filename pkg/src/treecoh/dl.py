"""Diestel-Leader graphs, the lamplighter action and slab orbit counts.

A vertex of the (q+1)-regular tree is coded by its height k and a finitely
supported digit map on the positions {j >= k}; its parent forgets position
k and its children add one digit there.  Both factors use this coding.  A
DL vertex pairs u at height k with v at height -k, and reads as the
lamplighter configuration

    c(i) = u(i)          for i >= k
    c(i) = v(-i - 1)     for i <  k

with the lamp at k.  The element (g, s) acts by c -> g + c(. - s), k -> k + s.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from .errors import InputError, TruncationDepthError
from .prodcomplex import ProductComplex
from .treegeo import TruncatedTree, build_regular

Label = Tuple[Tuple[int, int], ...]


def _label(d: Dict[int, int], q: int) -> Label:
    return tuple(sorted((i, x % q) for i, x in d.items() if x % q))


@dataclass(frozen=True, order=True)
class CodedVertex:
    height: int
    label: Label = ()

    def digits(self) -> Dict[int, int]:
        return dict(self.label)

    def parent(self) -> "CodedVertex":
        return CodedVertex(self.height + 1, tuple((i, x) for i, x in self.label if i != self.height))

    def children(self, q: int) -> List["CodedVertex"]:
        h = self.height - 1
        return [CodedVertex(h, _label({**self.digits(), h: a}, q)) for a in range(q)]


@dataclass(frozen=True, order=True)
class DLVertex:
    u: CodedVertex
    v: CodedVertex

    def __post_init__(self) -> None:
        if self.u.height + self.v.height != 0:
            raise InputError("DL vertices have opposite heights")

    @property
    def k(self) -> int:
        return self.u.height

    def configuration(self) -> Dict[int, int]:
        c = dict(self.u.label)
        for j, x in self.v.label:
            c[-j - 1] = x
        return c

    @classmethod
    def from_configuration(cls, k: int, c: Dict[int, int], q: int) -> "DLVertex":
        u = {i: x for i, x in c.items() if i >= k}
        v = {-i - 1: x for i, x in c.items() if i < k}
        return cls(CodedVertex(k, _label(u, q)), CodedVertex(-k, _label(v, q)))

    def neighbours(self, q: int) -> List["DLVertex"]:
        out = [DLVertex(self.u.parent(), c) for c in self.v.children(q)]
        out += [DLVertex(c, self.v.parent()) for c in self.u.children(q)]
        return out


def _in_budget(x: DLVertex, N: int) -> bool:
    return (abs(x.k) <= N and all(i < N for i, _ in x.u.label) and all(j < N for j, _ in x.v.label))


def dl_graph(q: int, N: int) -> nx.Graph:
    """DL(q, q) on heights |k| <= N with every digit position below N (both factors)."""
    if q < 2 or N < 1:
        raise InputError("need q >= 2 and N >= 1")
    G = nx.Graph()
    for k in range(-N, N + 1):
        positions = range(-N, N)
        for digits in product(range(q), repeat=2 * N):
            c = {i: a for i, a in zip(positions, digits) if a}
            G.add_node(DLVertex.from_configuration(k, c, q))
    for x in list(G.nodes):
        for y in x.neighbours(q):
            if y in G:
                G.add_edge(x, y)
    return G


def y0_graph(pc: ProductComplex, level=0) -> nx.Graph:
    """Vertices of X with beta = level; two are adjacent when they are opposite corners of a square."""
    if pc.d != 2:
        raise InputError("the level graph is built for two factors")
    level = Fraction(level)
    S, T = pc.factors
    w0, w1 = pc.weights
    G = nx.Graph()
    for a in S.vertices():
        for b in T.vertices():
            if w0 * S.height(a) + w1 * T.height(b) == level:
                G.add_node((a, b))
    for e in S.edge_list():
        for f in T.edge_list():
            x, y = (S.parent(e), f), (e, T.parent(f))
            if x in G and y in G:
                G.add_edge(x, y)
    return G


def tree_coding(t: TruncatedTree) -> Dict[int, CodedVertex]:
    """Child index along the path from the top as the digit at each height; the spine is all zeros."""
    out = {t.top: CodedVertex(t.N)}
    stack = [t.top]
    while stack:
        v = stack.pop()
        base = out[v].digits()
        for a, c in enumerate(t.children(v)):
            h = t.height(c)
            out[c] = CodedVertex(h, _label({**base, h: a}, len(t.children(v))))
            stack.append(c)
    return out


@dataclass
class DLIsoReport:
    q: int
    N: int
    vertices: int
    edges: int
    bijective: bool
    edges_preserved: bool
    hash_equal: bool
    connected: bool
    interior_degrees: List[int]
    level_zero_count: int

    @property
    def ok(self) -> bool:
        return (self.bijective and self.edges_preserved and self.hash_equal and self.connected
                and self.interior_degrees == [2 * self.q] and self.level_zero_count == self.q ** (2 * self.N))

    def to_json_obj(self) -> dict:
        return {"q": self.q, "N": self.N, "vertices": self.vertices, "edges": self.edges,
                "bijective": self.bijective, "edges_preserved": self.edges_preserved,
                "hash_equal": self.hash_equal, "connected": self.connected,
                "interior_degrees": self.interior_degrees, "level_zero_count": self.level_zero_count, "ok": self.ok}


def dl_isomorphism(q: int, N: int) -> DLIsoReport:
    """Compare the coded graph with the level-zero graph of T x T via an explicit, verified map.

    The map sends a tree-vertex pair to the pair of codings; it is checked to
    be a bijection carrying edges onto edges, and the Weisfeiler-Lehman hashes
    of the two graphs are compared as an independent canonical invariant.
    """
    t = build_regular(q, N)
    pc = ProductComplex([t, t])
    coded = dl_graph(q, N)
    level = y0_graph(pc)
    code = tree_coding(t)
    phi = {x: DLVertex(code[x[0]], code[x[1]]) for x in level.nodes}
    bij = len(set(phi.values())) == len(phi) == coded.number_of_nodes() and all(y in coded for y in phi.values())
    mapped = {frozenset((phi[a], phi[b])) for a, b in level.edges}
    target = {frozenset(e) for e in coded.edges}
    wl = nx.weisfeiler_lehman_graph_hash
    hash_equal = wl(nx.convert_node_labels_to_integers(coded)) == wl(nx.convert_node_labels_to_integers(level))
    degs = sorted({coded.degree(x) for x in coded.nodes if -N < x.k < N})
    zero = sum(1 for x in coded.nodes if x.k == 0)
    return DLIsoReport(q, N, coded.number_of_nodes(), coded.number_of_edges(), bij, mapped == target,
                       hash_equal, nx.is_connected(coded), degs, zero)


def edge_list_csv(G: nx.Graph) -> str:
    """Edge list with vertices numbered in sorted order."""
    nodes = sorted(G.nodes)
    idx = {x: i for i, x in enumerate(nodes)}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "target"])
    for a, b in sorted(tuple(sorted((idx[a], idx[b]))) for a, b in G.edges):
        w.writerow([a, b])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# the lamplighter group
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lamplighter:
    """(g, s) in (Z/q) wr Z with (g, s)(g', s') = (g + g'(. - s), s + s')."""

    q: int
    lamps: Label = ()
    shift: int = 0

    @classmethod
    def make(cls, q: int, lamps: Dict[int, int], shift: int = 0) -> "Lamplighter":
        return cls(q, _label(lamps, q), shift)

    def __mul__(self, other: "Lamplighter") -> "Lamplighter":
        if other.q != self.q:
            raise InputError("alphabets differ")
        g = dict(self.lamps)
        for i, x in other.lamps:
            g[i + self.shift] = g.get(i + self.shift, 0) + x
        return Lamplighter(self.q, _label(g, self.q), self.shift + other.shift)

    def inverse(self) -> "Lamplighter":
        g = {i - self.shift: -x for i, x in self.lamps}
        return Lamplighter(self.q, _label(g, self.q), -self.shift)


def _act_config(el: Lamplighter, k: int, c: Dict[int, int]) -> Tuple[int, Dict[int, int]]:
    out = dict(el.lamps)
    for i, x in c.items():
        out[i + el.shift] = out.get(i + el.shift, 0) + x
    return k + el.shift, out


def lamplighter_act(el: Lamplighter, x: DLVertex, budget: Optional[int] = None) -> DLVertex:
    k, c = _act_config(el, x.k, x.configuration())
    y = DLVertex.from_configuration(k, c, el.q)
    if budget is not None and not _in_budget(y, budget):
        raise TruncationDepthError(f"image leaves the budget {budget}; deepen the budget")
    return y


def act_tree_pair(el: Lamplighter, u: CodedVertex, v: CodedVertex) -> Tuple[CodedVertex, CodedVertex]:
    """The same element acting on an arbitrary vertex pair of T x T (any beta level)."""
    s, q = el.shift, el.q
    g = dict(el.lamps)
    hu = u.height + s
    nu = {i: g.get(i, 0) for i in g if i >= hu}
    for i, x in u.label:
        nu[i + s] = nu.get(i + s, 0) + x
    hv = v.height - s
    nv = {-i - 1: x for i, x in g.items() if i < -hv}
    for j, x in v.label:
        jj = j - s
        nv[jj] = nv.get(jj, 0) + x
    return CodedVertex(hu, _label(nu, q)), CodedVertex(hv, _label(nv, q))


def solve_transport(x: DLVertex, y: DLVertex, q: int) -> Lamplighter:
    """The unique element sending x to y."""
    s = y.k - x.k
    cx, cy = x.configuration(), y.configuration()
    g = dict(cy)
    for i, a in cx.items():
        g[i + s] = g.get(i + s, 0) - a
    return Lamplighter(q, _label(g, q), s)


def random_element(q: int, rng: random.Random, span: int = 3) -> Lamplighter:
    lamps = {i: rng.randrange(q) for i in range(-span, span)}
    return Lamplighter.make(q, lamps, rng.randint(-span, span))


def random_vertex(q: int, rng: random.Random, span: int = 3) -> DLVertex:
    c = {i: rng.randrange(q) for i in range(-span, span)}
    return DLVertex.from_configuration(rng.randint(-span, span), c, q)


@dataclass
class ActionReport:
    q: int
    samples: int
    adjacency_ok: bool
    beta_ok: bool
    composition_ok: bool
    transitive_ok: bool
    free_ok: bool
    identity_ok: bool

    @property
    def ok(self) -> bool:
        return all((self.adjacency_ok, self.beta_ok, self.composition_ok, self.transitive_ok, self.free_ok,
                    self.identity_ok))

    def to_json_obj(self) -> dict:
        out = dict(self.__dict__)
        out["ok"] = self.ok
        return out


def check_action(q: int, samples: int = 10000, seed: int = 0) -> ActionReport:
    """Adjacency, beta, the wreath-product law and simple transitivity on random samples."""
    rng = random.Random(seed)
    adj = beta = comp = trans = free = True
    one = Lamplighter(q)
    ident = True
    for _ in range(samples):
        g, h = random_element(q, rng), random_element(q, rng)
        x = random_vertex(q, rng)
        y = rng.choice(x.neighbours(q))
        gx, gy = lamplighter_act(g, x), lamplighter_act(g, y)
        adj &= gy in gx.neighbours(q)
        beta &= gx.u.height + gx.v.height == 0
        u, v = act_tree_pair(g, x.u, x.v)
        beta &= (u, v) == (gx.u, gx.v)
        # each factor separately: parents go to parents
        pu, pv = act_tree_pair(g, x.u.parent(), x.v.parent())
        adj &= pu == u.parent() and pv == v.parent()
        comp &= lamplighter_act(g * h, x) == lamplighter_act(g, lamplighter_act(h, x))
        z = random_vertex(q, rng)
        t = solve_transport(x, z, q)
        trans &= lamplighter_act(t, x) == z
        # stabiliser: the transport from x to itself is the identity
        free &= solve_transport(x, x, q) == one
        free &= g == one or lamplighter_act(g, x) != x
        ident &= lamplighter_act(one, x) == x
    return ActionReport(q, samples, adj, beta, comp, trans, free, ident)


# ---------------------------------------------------------------------------
# slabs
# ---------------------------------------------------------------------------


def _canonical(u: CodedVertex, v: CodedVertex, q: int) -> Tuple[int, Label]:
    """Orbit representative: move u to the zero vertex at height 0, then clear the lamps u no longer sees."""
    s = -u.height
    to_zero = Lamplighter(q, _label({i + s: -x for i, x in u.label}, q), s)
    u2, v2 = act_tree_pair(to_zero, u, v)
    clear = Lamplighter(q, _label({-j - 1: -x for j, x in v2.label if -j - 1 < 0}, q), 0)
    u3, v3 = act_tree_pair(clear, u2, v2)
    if u3 != CodedVertex(0):
        raise AssertionError("normalisation moved the first coordinate")
    return v3.height, v3.label


def slab_vertices(q: int, level: int, N: int) -> Iterator[Tuple[CodedVertex, CodedVertex]]:
    """Vertex pairs of the depth-N truncation of T x T at one beta level."""
    code = tree_coding(build_regular(q, N))
    by_height: Dict[int, List[CodedVertex]] = {}
    for c in code.values():
        by_height.setdefault(c.height, []).append(c)
    for k in range(-N, N + 1):
        for u in by_height.get(k, []):
            for v in by_height.get(level - k, []):
                yield u, v


@dataclass
class SlabReport:
    q: int
    levels: List[int]
    orbits: Dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.orbits.values())

    @property
    def one_per_level(self) -> bool:
        return all(v == 1 for v in self.orbits.values())

    def to_json_obj(self) -> dict:
        return {"q": self.q, "levels": self.levels, "orbits": {str(k): v for k, v in self.orbits.items()},
                "total": self.total, "one_per_level": self.one_per_level}


def slab_cocompactness(q: int, interval: Sequence[int], budget: int) -> SlabReport:
    """Orbits of the lamplighter group on vertices with beta in [lo, hi] (integer levels), counted in a truncation.

    ``interval`` is (lo, hi); an empty interval has lo > hi.
    """
    lo, hi = interval
    levels = list(range(int(lo), int(hi) + 1))
    if levels and max(abs(lo), abs(hi)) > budget:
        raise TruncationDepthError("interval exceeds the truncation budget")
    orbits = {}
    for lv in levels:
        reps = {_canonical(u, v, q) for u, v in slab_vertices(q, lv, budget)}
        orbits[lv] = len(reps)
    return SlabReport(q, levels, orbits)
