"""Finite truncations of rooted trees with a distinguished end.

A :class:`TruncatedTree` stores every vertex below the top spine vertex
x_N whose height is at least -N.  Heights increase towards the
distinguished end, every vertex except the top has exactly one parent one
level up, and the spine x_{-N}, ..., x_N is the path of first children.

Vertex ids are assigned breadth-first from the top with children in
increasing id order, so "lowest child" is a canonical deterministic choice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .errors import BoundaryError, InputError, TruncationDepthError

Branching = Union[int, Sequence[int], Callable[[int, int], int]]


class TruncatedTree:
    """Immutable truncated tree; see module docstring for conventions."""

    def __init__(self, N: int, heights: Sequence[int], parents: Sequence[int],
                 spine: Sequence[int], q: Optional[int] = None):
        if N < 1:
            raise InputError("depth N must be at least 1")
        self.N = N
        self.q = q
        self._h = tuple(heights)
        self._parent = tuple(parents)
        kids: List[List[int]] = [[] for _ in self._h]
        for v, p in enumerate(self._parent):
            if p >= 0:
                kids[p].append(v)
        self._children = tuple(tuple(sorted(k)) for k in kids)
        self._spine = tuple(spine)
        self._validate()
        tmp: Dict[int, List[int]] = {}
        for v, h in enumerate(self._h):
            tmp.setdefault(h, []).append(v)
        self._by_height = {h: tuple(vs) for h, vs in tmp.items()}
        # depth-first intervals make "is below" an O(1) test
        self._tin = [0] * len(self._h)
        self._tout = [0] * len(self._h)
        clock = 0
        stack = [(self.top, False)]
        while stack:
            v, done = stack.pop()
            if done:
                self._tout[v] = clock
                continue
            self._tin[v] = clock
            clock += 1
            stack.append((v, True))
            for c in reversed(self._children[v]):
                stack.append((c, False))

    def _validate(self) -> None:
        N = self.N
        tops = [v for v, p in enumerate(self._parent) if p < 0]
        if len(tops) != 1:
            raise InputError("tree must have exactly one top vertex")
        for v, p in enumerate(self._parent):
            h = self._h[v]
            if not -N <= h <= N:
                raise InputError(f"vertex {v} height {h} outside [-{N}, {N}]")
            if p >= 0 and self._h[p] != h + 1:
                raise InputError(f"vertex {v} parent is not one level up")
            if h > -N and not self._children[v]:
                raise InputError(f"vertex {v} at height {h} has no children above the frontier")
            if h == -N and self._children[v]:
                raise InputError("vertices at the bottom frontier cannot have children")
        if len(self._spine) != 2 * N + 1:
            raise InputError("spine must have 2N+1 vertices")
        for n, v in zip(range(-N, N + 1), self._spine):
            if self._h[v] != n:
                raise InputError("spine heights must run from -N to N")
        for a, b in zip(self._spine, self._spine[1:]):
            if self._parent[a] != b:
                raise InputError("spine must be a path")
        if self._parent[self._spine[-1]] != -1:
            raise InputError("spine must end at the top vertex")

    # basic accessors -------------------------------------------------------
    @property
    def top(self) -> int:
        return self._spine[-1]

    @property
    def num_vertices(self) -> int:
        return len(self._h)

    def vertices(self) -> range:
        return range(len(self._h))

    def height(self, v: int) -> int:
        return self._h[v]

    def parent(self, v: int) -> Optional[int]:
        p = self._parent[v]
        return None if p < 0 else p

    def children(self, v: int) -> Tuple[int, ...]:
        return self._children[v]

    def x(self, n: int) -> int:
        """Spine vertex x_n."""
        if not -self.N <= n <= self.N:
            raise BoundaryError(f"spine index {n} outside [-{self.N}, {self.N}]")
        return self._spine[n + self.N]

    @property
    def spine(self) -> Tuple[int, ...]:
        return self._spine

    def at_height(self, h: int) -> Tuple[int, ...]:
        return self._by_height.get(h, ())

    def edges(self) -> range:
        """Edges are named by their lower endpoint; the top vertex names none."""
        return range(len(self._h))

    def is_edge(self, e: int) -> bool:
        return self._parent[e] >= 0

    def edge_ends(self, e: int) -> Tuple[int, int]:
        """(bottom, top) endpoints of edge e."""
        p = self._parent[e]
        if p < 0:
            raise InputError("the top vertex does not name an edge")
        return e, p

    def edge_list(self) -> List[int]:
        return [v for v in range(len(self._h)) if self._parent[v] >= 0]

    def incident_edges(self, v: int) -> List[int]:
        out = list(self._children[v])
        if self._parent[v] >= 0:
            out.append(v)
        return out

    # walking -----------------------------------------------------------------
    def ascend(self, v: int, steps: int = 1) -> int:
        """g(v): the vertex one level above; ``steps`` applies it repeatedly."""
        for _ in range(steps):
            p = self._parent[v]
            if p < 0:
                raise BoundaryError(f"cannot ascend from the top vertex {v}")
            v = p
        return v

    def is_below(self, v: int, u: int) -> bool:
        """True when u lies on the path from v upward (v itself included)."""
        return self._tin[u] <= self._tin[v] < self._tout[u]

    def descendants_at(self, v: int, h: int) -> List[int]:
        if h > self._h[v]:
            return []
        level = [v]
        for _ in range(self._h[v] - h):
            level = [c for u in level for c in self._children[u]]
        return level

    def distance(self, u: int, v: int) -> int:
        d = 0
        while u != v:
            if self._h[u] > self._h[v]:
                u, v = v, u
            u = self._parent[u]
            d += 1
        return d

    # strata --------------------------------------------------------------------
    def c_set(self, n: int) -> List[int]:
        """Vertices of C_n: below x_n with height at least -n."""
        if not 0 <= n <= self.N:
            raise InputError(f"stage {n} outside [0, {self.N}]")
        out = []
        level = [self.x(n)]
        for _ in range(2 * n + 1):
            out.extend(level)
            level = [c for u in level for c in self._children[u]]
        return out

    def ec_set(self, n: int) -> List[int]:
        """EC_n: the vertices of C_n at height -n (EC_0 is {x_0})."""
        if not 0 <= n <= self.N:
            raise InputError(f"stage {n} outside [0, {self.N}]")
        return self.descendants_at(self.x(n), -n)

    def in_c(self, v: int, n: int) -> bool:
        return self._h[v] >= -n and self.is_below(v, self.x(n))

    # serialisation ---------------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "q": self.q,
            "N": self.N,
            "vertices": [
                {"id": v, "h": self._h[v], "parent": self.parent(v), "children": list(self._children[v])}
                for v in range(len(self._h))
            ],
            "spine": list(self._spine),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TruncatedTree":
        try:
            verts = sorted(obj["vertices"], key=lambda r: r["id"])
            if [r["id"] for r in verts] != list(range(len(verts))):
                raise InputError("vertex ids must be 0..n-1")
            heights = [int(r["h"]) for r in verts]
            parents = [-1 if r["parent"] is None else int(r["parent"]) for r in verts]
            tree = cls(int(obj["N"]), heights, parents, [int(s) for s in obj["spine"]], obj.get("q"))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed tree JSON: {exc}") from exc
        for r in verts:
            if sorted(r.get("children", [])) != list(tree.children(r["id"])):
                raise InputError(f"children of vertex {r['id']} disagree with parents")
        return tree

    def __repr__(self) -> str:
        return f"TruncatedTree(q={self.q}, N={self.N}, vertices={self.num_vertices})"


def build_tree(N: int, branching: Branching) -> TruncatedTree:
    """Breadth-first construction of the truncation below x_N.

    ``branching`` is a constant child count, a per-vertex list in
    breadth-first order, or a callable ``(vertex_id, height) -> count``.
    The first child of each spine vertex continues the spine.
    """
    if N < 1:
        raise InputError("depth N must be at least 1")

    def count(v: int, h: int) -> int:
        if isinstance(branching, int):
            return branching
        if callable(branching):
            return int(branching(v, h))
        try:
            return int(branching[v])
        except IndexError as exc:
            raise InputError("branching list is too short") from exc

    heights = [N]
    parents = [-1]
    frontier = [0]
    for h in range(N - 1, -N - 1, -1):
        nxt = []
        for v in frontier:
            k = count(v, h + 1)
            if k < 1:
                raise InputError("every non-frontier vertex needs at least one child")
            for _ in range(k):
                heights.append(h)
                parents.append(v)
                nxt.append(len(heights) - 1)
        frontier = nxt
    spine = [0]
    kids: Dict[int, int] = {}
    for v, p in enumerate(parents):
        if p >= 0 and p not in kids:
            kids[p] = v
    for _ in range(2 * N):
        spine.append(kids[spine[-1]])
    q = branching if isinstance(branching, int) else None
    return TruncatedTree(N, heights, parents, list(reversed(spine)), q)


def build_regular(q: int, N: int) -> TruncatedTree:
    """Truncation of the (q+1)-valent regular tree."""
    if not isinstance(q, int) or q < 2:
        raise InputError(f"regular trees need q >= 2, got {q!r}")
    return build_tree(N, q)


# ---------------------------------------------------------------------------
# ends and Busemann functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RayEnd:
    """An end given by an anchor vertex and a deterministic walk.

    ``rule`` is ``"up"`` (towards the distinguished end), ``"lowest"`` or
    ``"highest"`` (descend by child id).  ``choices`` optionally overrides
    the first few descent steps with child ranks.
    """

    anchor: int
    rule: str = "lowest"
    choices: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.rule not in ("up", "lowest", "highest"):
            raise InputError(f"unknown descent rule {self.rule!r}")
        if self.rule == "up" and self.choices:
            raise InputError("an upward ray takes no child choices")

    def ray(self, tree: TruncatedTree) -> List[int]:
        if not 0 <= self.anchor < tree.num_vertices:
            raise InputError(f"anchor {self.anchor} is not a vertex")
        out = [self.anchor]
        v = self.anchor
        step = 0
        while True:
            if self.rule == "up":
                p = tree.parent(v)
                if p is None:
                    return out
                v = p
            else:
                kids = tree.children(v)
                if not kids:
                    return out
                if step < len(self.choices):
                    rank = self.choices[step]
                    if not 0 <= rank < len(kids):
                        raise InputError(f"child rank {rank} out of range at step {step}")
                    v = kids[rank]
                else:
                    v = kids[0] if self.rule == "lowest" else kids[-1]
            out.append(v)
            step += 1

    def to_json_obj(self) -> dict:
        return {"anchor": self.anchor, "rule": self.rule, "choices": list(self.choices)}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RayEnd":
        return cls(int(obj["anchor"]), obj.get("rule", "lowest"), tuple(obj.get("choices", ())))


def distinguished_end(tree: TruncatedTree, anchor: Optional[int] = None) -> RayEnd:
    """The end every height function points to, anchored at x_0 by default."""
    return RayEnd(tree.x(0) if anchor is None else anchor, "up")


def busemann_value(tree: TruncatedTree, v: int, end: RayEnd, horizon: Optional[int] = None) -> int:
    """b(v) = lim_t (t - d(v, ray(t))) normalised so that b(anchor) = 0.

    ``horizon`` limits how many ray steps may be used.  When the nearest ray
    point to v is the last usable one and the ray continues inside the
    truncation, the limit cannot be certified and TruncationDepthError is
    raised instead of returning a possibly wrong value.
    """
    if horizon is not None and horizon < 0:
        raise InputError("horizon must be nonnegative")
    ray = end.ray(tree)
    full = len(ray) - 1
    T = full if horizon is None else min(horizon, full)
    dists = [tree.distance(v, u) for u in ray[: T + 1]]
    # in a tree, once the ray steps away from v it never comes back
    certified = T == full or dists[T] == 0 or any(dists[s + 1] > dists[s] for s in range(T))
    if not certified:
        raise TruncationDepthError(
            f"ray horizon {T} does not pass the confluence point of vertex {v}; deepen truncation"
        )
    return T - dists[T]


def busemann_map(tree: TruncatedTree, end: RayEnd) -> List[int]:
    """Busemann values of every vertex for ``end`` (same normalisation)."""
    a = end.anchor
    if not 0 <= a < tree.num_vertices:
        raise InputError(f"anchor {a} is not a vertex")
    ha = tree.height(a)
    if end.rule == "up":
        return [tree.height(v) - ha for v in tree.vertices()]
    ray = end.ray(tree)
    pos = {u: s for s, u in enumerate(ray)}
    above = set()
    u = a
    while u is not None:
        above.add(u)
        u = tree.parent(u)
    out = [0] * tree.num_vertices
    order = sorted(tree.vertices(), key=lambda w: -tree.height(w))
    for w in order:
        if w in pos:
            out[w] = pos[w]
        elif w in above:
            out[w] = -(tree.height(w) - ha)
        else:
            out[w] = out[tree.parent(w)] - 1
    return out
