"""Finite rotation groups and word search over tuples of group elements.

A program whose words all lie in a finite group ``G`` acts on the register
eigenvalues as an element of ``G x G x ... x G``; finding a measurement
procedure is then a shortest-word problem in that product.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from .control_ir import (
    BoolFunc,
    Conditional,
    Program,
    SpectrumSpec,
    Unconditional,
    measures,
    realizes,
)
from .rotations import (
    DEFAULT_TOL,
    IDENTITY,
    Rotation,
    Rz,
    compose,
    distance,
    is_order_two,
)

GROUP_ORDERS = {"D8": 16, "S4": 24, "A5": 60}
_TABLE_TOL = 1e-10


def _key(r: Rotation) -> tuple:
    return tuple(round(c, 8) + 0.0 for c in r.q)


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    name: str
    elements: tuple[Rotation, ...]
    mul_table: np.ndarray  # mul_table[a, b] = index of elements[a] @ elements[b]
    inverse_table: np.ndarray

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, r: Rotation) -> int:
        try:
            return self._lookup[_key(r)]
        except KeyError:
            for idx, e in enumerate(self.elements):
                if distance(e, r) < 1e-8:
                    return idx
            raise KeyError(f"{r!r} is not in {self.name}") from None

    @property
    def _lookup(self) -> dict:
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {_key(e): i for i, e in enumerate(self.elements)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = int(self.mul_table[a, x])
            k += 1
        return k

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, (self.element_order(a) for a in range(self.order)), 1)

    def power_index(self, a: int, k: int) -> int:
        k %= self.element_order(a)
        x = 0
        for _ in range(k):
            x = int(self.mul_table[a, x])
        return x

    def involutions(self) -> list[int]:
        return [a for a in range(self.order) if self.element_order(a) == 2]


def _closure(generators: Sequence[Rotation]) -> list[Rotation]:
    elements = [IDENTITY]
    seen = {_key(IDENTITY)}
    queue = deque([IDENTITY])
    while queue:
        x = queue.popleft()
        for g in generators:
            y = compose(g, x)
            k = _key(y)
            if k not in seen:
                seen.add(k)
                elements.append(y)
                queue.append(y)
    return elements


def _d8_elements() -> list[Rotation]:
    turns = [Rz(k * math.pi / 4) for k in range(8)]
    flips = [
        Rotation.about((math.cos(k * math.pi / 8), math.sin(k * math.pi / 8), 0.0), math.pi)
        for k in range(8)
    ]
    return turns + flips


@lru_cache(maxsize=None)
def build_group(name: str) -> FiniteGroup:
    """Rotation embeddings of D8 (octagon), S4 (cube/octahedron), A5 (icosahedron)."""
    if name == "D8":
        elements = _d8_elements()
    elif name == "S4":
        elements = _closure([Rotation.about((1, 0, 0), math.pi / 2),
                             Rotation.about((0, 1, 0), math.pi / 2)])
    elif name == "A5":
        phi = (1 + math.sqrt(5)) / 2
        elements = _closure([Rotation.about((0, 1, phi), 2 * math.pi / 5),
                             Rotation.about((0, 0, 1), math.pi)])
    else:
        raise ValueError(f"unknown group {name!r}; expected one of {sorted(GROUP_ORDERS)}")
    if len(elements) != GROUP_ORDERS[name]:
        raise RuntimeError(f"{name} closure produced {len(elements)} elements")

    lookup = {_key(e): i for i, e in enumerate(elements)}
    n = len(elements)
    mul = np.empty((n, n), dtype=np.int64)
    for a, b in itertools.product(range(n), repeat=2):
        mul[a, b] = lookup[_key(compose(elements[a], elements[b]))]
    inv = np.array([lookup[_key(e.inverse())] for e in elements], dtype=np.int64)
    return FiniteGroup(name, tuple(elements), mul, inv)


@dataclass(frozen=True)
class SearchResult:
    program: Program
    length: int
    explored: int
    mode: str
    target: BoolFunc
    outcome_axis: tuple[float, float, float] | None = None

    def to_json(self, group: str) -> dict:
        return {
            "group": group,
            "target": self.target.to_json(),
            "mode": self.mode,
            "length": self.length,
            "explored": self.explored,
            "outcome_axis": None if self.outcome_axis is None else list(self.outcome_axis),
            "program": [w.to_json() for w in self.program.words],
        }


class _Space:
    """Residue classes of the spectrum modulo the group exponent."""

    def __init__(self, G: FiniteGroup, spectrum: SpectrumSpec):
        self.G = G
        self.spectrum = spectrum
        exp = G.exponent
        self.residues = sorted({j % exp for j in spectrum.distinct})
        self.class_of = {j: self.residues.index(j % exp) for j in spectrum.distinct}
        # cond[g] = tuple of g^r over residues
        self.cond = np.array(
            [[G.power_index(g, r) for r in self.residues] for g in range(G.order)],
            dtype=np.int64,
        )

    def reduce(self, f: BoolFunc) -> tuple[int, ...] | None:
        vals: dict[int, int] = {}
        for j, v in f.table:
            c = self.class_of[j]
            if vals.setdefault(c, v) != v:
                return None
        return tuple(vals[c] for c in range(len(self.residues)))


def _strict_goal(G: FiniteGroup, state: tuple, pattern: tuple) -> int | None:
    """Canonical state (identity at class 0) -> final unconditional index, or None.

    Matches iff classes sharing class 0's value hold the identity and all
    other classes hold one common involution.
    """
    other = None
    for s, v in zip(state, pattern):
        if v == pattern[0]:
            if s != 0:
                return None
        else:
            if other is None:
                other = s
            elif s != other:
                return None
    if other is None:
        return 0 if pattern[0] == 0 else -1
    if G.element_order(other) != 2:
        return None
    return other if pattern[0] == 1 else 0


def _state_goal(points: np.ndarray, state: tuple, pattern: tuple, tol: float) -> bool:
    ref = points[state[0]]
    for s, v in zip(state, pattern):
        target = ref if v == pattern[0] else -ref
        if np.linalg.norm(points[s] - target) > tol:
            return False
    return True


def _search_many(G: FiniteGroup, spectrum: SpectrumSpec, targets: dict, mode: str,
                 s0, max_len: int, tol: float) -> tuple[dict, int]:
    """Breadth-first search by conditional-word count for several targets at once.

    Unconditional words are free, so states are orbits under a common left
    multiplication, represented with the identity in class 0.  Conjugating a
    conditional generator by a free unconditional word gives another
    generator, so each orbit has exactly |G| successors.
    """
    space = _Space(G, spectrum)
    mul, inv = G.mul_table, G.inverse_table
    points = None
    if mode == "state_level":
        s0 = np.asarray(s0, dtype=float)
        points = np.array([e.apply(s0) for e in G.elements])

    start = tuple([0] * len(space.residues))
    parent: dict[tuple, tuple | None] = {start: None}
    found: dict = {}
    pending = dict(targets)

    def check(state, depth):
        for name, pattern in list(pending.items()):
            if pattern is None:
                continue
            if mode == "strict":
                fin = _strict_goal(G, state, pattern)
                if fin is None:
                    continue
                if fin == -1:  # constant 1: any involution as the final flip
                    fin = G.involutions()[0]
                found[name] = (state, depth, fin)
            else:
                if not _state_goal(points, state, pattern, tol):
                    continue
                found[name] = (state, depth, 0)
            del pending[name]

    check(start, 0)
    frontier = [start]
    depth = 0
    while pending and frontier and depth < max_len:
        depth += 1
        nxt = []
        for state in frontier:
            st = np.array(state)
            for g in range(G.order):
                y = mul[space.cond[g], st]
                y = tuple(int(c) for c in mul[inv[y[0]], y])
                if y in parent:
                    continue
                parent[y] = (state, g, y)
                nxt.append(y)
                check(y, depth)
                if not pending:
                    break
            if not pending:
                break
        frontier = nxt

    results = {}
    for name, (state, length, fin) in found.items():
        results[name] = (_reconstruct(G, space, parent, state, fin), length)
    return results, len(parent)


def _reconstruct(G: FiniteGroup, space: _Space, parent: dict, state: tuple, final: int):
    """Conditional words plus one trailing unconditional word.

    Each step applied ``cond(g)`` and then renormalised by left-multiplying
    with ``h = y0^-1``.  Pushing those renormalisations to the end turns
    ``g`` into ``H g H^-1`` where ``H`` is the accumulated renormalisation.
    """
    steps = []
    s = state
    while parent[s] is not None:
        prev, g, y = parent[s]
        steps.append((prev, g))
        s = prev
    steps.reverse()
    words = []
    acc = 0  # accumulated left factor relating canonical and executed tuples
    mul, inv = G.mul_table, G.inverse_table
    for prev, g in steps:
        # executed tuple x = acc^-1 * canonical(prev);
        # canonical step: y = cond(g) * canonical(prev), renorm h = y0^-1
        g_exec = int(mul[mul[inv[acc], g], acc])
        words.append(Conditional(G.elements[g_exec]))
        st = np.array(prev)
        y = mul[space.cond[g], st]
        h = int(inv[y[0]])
        acc = int(mul[h, acc])
    # executed tuple = acc^-1 * canonical(state); want final * canonical
    last = int(mul[final, acc])
    if last != 0:
        words.append(Unconditional(G.elements[last]))
    return tuple(words)


def bfs_search(G: FiniteGroup, spectrum: SpectrumSpec, target: BoolFunc, mode: str = "strict",
               s0: Sequence[float] | None = None, max_len: int = 4,
               tol: float = DEFAULT_TOL, uniform_cost: bool = False) -> SearchResult | None:
    """Shortest word (by conditional count) meeting the strict or state-level predicate."""
    if mode not in ("strict", "state_level"):
        raise ValueError("mode must be 'strict' or 'state_level'")
    if mode == "state_level" and s0 is None:
        raise ValueError("state_level search needs an initial Bloch vector s0")
    if uniform_cost:
        return _uniform_search(G, spectrum, target, mode, s0, max_len, tol)
    space = _Space(G, spectrum)
    pattern = space.reduce(target)
    if pattern is None:
        return None
    res, explored = _search_many(G, spectrum, {"t": pattern}, mode, s0, max_len, tol)
    if "t" not in res:
        return None
    words, length = res["t"]
    return _finish(spectrum, target, words, length, explored, mode, s0, tol)


def _finish(spectrum, target, words, length, explored, mode, s0, tol):
    prog = Program(spectrum, words)
    axis = None
    if mode == "strict":
        if realizes(prog, target, tol) is None:
            raise RuntimeError("search result fails re-verification")
    else:
        a = measures(prog, target, s0, tol)
        if a is None:
            raise RuntimeError("search result fails re-verification")
        axis = tuple(float(c) for c in a)
    return SearchResult(prog, length, explored, mode, target, axis)


def minimal_lengths(G: FiniteGroup, spectrum: SpectrumSpec, targets: Iterable[BoolFunc],
                    mode: str = "strict", s0=None, max_len: int = 4,
                    tol: float = DEFAULT_TOL) -> list[tuple[BoolFunc, SearchResult | None]]:
    """One shared BFS answering many targets."""
    targets = list(targets)
    space = _Space(G, spectrum)
    patterns = {n: space.reduce(f) for n, f in enumerate(targets)}
    res, explored = _search_many(G, spectrum, patterns, mode, s0, max_len, tol)
    out = []
    for n, f in enumerate(targets):
        if n in res:
            words, length = res[n]
            out.append((f, _finish(spectrum, f, words, length, explored, mode, s0, tol)))
        else:
            out.append((f, None))
    return out


def _uniform_search(G, spectrum, target, mode, s0, max_len, tol):
    """Plain BFS over raw tuples where every word costs one step."""
    space = _Space(G, spectrum)
    pattern = space.reduce(target)
    if pattern is None:
        return None
    mul = G.mul_table
    points = None
    if mode == "state_level":
        points = np.array([e.apply(np.asarray(s0, float)) for e in G.elements])

    def goal(state):
        if mode == "strict":
            return _strict_goal_raw(G, state, pattern)
        return _state_goal(points, state, pattern, tol)

    start = tuple([0] * len(space.residues))
    parent = {start: None}
    frontier = [start]
    depth = 0
    hit = start if goal(start) else None
    while hit is None and frontier and depth < max_len:
        depth += 1
        nxt = []
        for state in frontier:
            st = np.array(state)
            for kind in ("u", "c"):
                for g in range(G.order):
                    gen = np.full(len(st), g) if kind == "u" else space.cond[g]
                    y = tuple(int(c) for c in mul[gen, st])
                    if y in parent:
                        continue
                    parent[y] = (state, kind, g)
                    nxt.append(y)
                    if goal(y):
                        hit = y
                        break
                if hit is not None:
                    break
            if hit is not None:
                break
        frontier = nxt
    if hit is None:
        return None
    words = []
    s = hit
    while parent[s] is not None:
        prev, kind, g = parent[s]
        e = G.elements[g]
        words.append(Unconditional(e) if kind == "u" else Conditional(e))
        s = prev
    words.reverse()
    return _finish(spectrum, target, tuple(words), depth, len(parent), mode, s0, tol)


def _strict_goal_raw(G, state, pattern):
    u = None
    for s, v in zip(state, pattern):
        if v == 0:
            if s != 0:
                return False
        else:
            if u is None:
                u = s
            elif s != u:
                return False
    return u is None or G.element_order(u) == 2


def enumerate_onestep(G: FiniteGroup, spectrum: SpectrumSpec, include_constant: bool = False,
                      tol: float = DEFAULT_TOL) -> list[BoolFunc]:
    """Functions realised by a single conditional word ``Conditional(g)``, g in G."""
    found: list[BoolFunc] = []
    for g in G.elements:
        for f in _onestep_pattern(Program(spectrum, (Conditional(g),)), tol):
            if f not in found and (include_constant or not f.is_constant()):
                found.append(f)
    return found


def _onestep_pattern(prog: Program, tol: float):
    from .control_ir import evaluate

    evals = evaluate(prog)
    nonid = [r for r in evals.values() if distance(r, IDENTITY) > tol]
    if not nonid:
        yield BoolFunc(tuple((j, 0) for j in evals))
        return
    u = nonid[0]
    if not is_order_two(u, tol):
        return
    table = []
    for j, r in evals.items():
        if distance(r, IDENTITY) <= tol:
            table.append((j, 0))
        elif distance(r, u) <= tol:
            table.append((j, 1))
        else:
            return
    f = BoolFunc(tuple(table))
    if realizes(prog, f, tol) is not None:
        yield f


def find_and_pair(G: FiniteGroup) -> tuple[Rotation, Rotation, Rotation]:
    """First involution pair (by table index) with ``uvuv`` of order two."""
    invs = G.involutions()
    for a in invs:
        for b in invs:
            ab = int(G.mul_table[a, b])
            w = int(G.mul_table[ab, ab])
            if w != 0 and G.element_order(w) == 2:
                u, v, wr = G.elements[a], G.elements[b], G.elements[w]
                assert is_order_two(wr)
                return u, v, wr
    raise RuntimeError(f"no AND pair in {G.name}; multiplication table is broken")


@dataclass(frozen=True)
class GenerationReport:
    ok: bool
    pairs: dict  # (i, j) -> size of the generated subgroup of G x G
    singles: dict  # i -> size of the projection onto coordinate i
    target_size: int


def _closure_size(G: FiniteGroup, gens: np.ndarray) -> int:
    """Order of the subgroup of G^m generated by ``gens`` (shape (k, m))."""
    n, m = G.order, gens.shape[1]
    weights = n ** np.arange(m - 1, -1, -1)
    seen = np.zeros(n**m, dtype=bool)
    seen[0] = True
    frontier = np.zeros((1, m), dtype=np.int64)
    total = 1
    while len(frontier):
        prod = G.mul_table[gens[:, None, :], frontier[None, :, :]].reshape(-1, m)
        codes = prod @ weights
        codes, first = np.unique(codes, return_index=True)
        new = ~seen[codes]
        seen[codes[new]] = True
        frontier = prod[first[new]]
        total += int(new.sum())
    return total


def generators(G: FiniteGroup, exponents: Sequence[int]) -> np.ndarray:
    """Unconditional ``(g,...,g)`` and conditional ``(g^e1, ..., g^em)`` for all g."""
    rows = [[g] * len(exponents) for g in range(G.order)]
    rows += [[G.power_index(g, e) for e in exponents] for g in range(G.order)]
    return np.array(rows, dtype=np.int64)


def generated_order(G: FiniteGroup, exponents: Sequence[int]) -> int:
    return _closure_size(G, generators(G, exponents))


def verify_generation_pairwise(G: FiniteGroup, exponents: Sequence[int]) -> GenerationReport:
    """Does the conditional/unconditional word set generate all of G^m?

    For a nonabelian simple G a subgroup of G^m projecting onto every
    coordinate is the whole product iff every pairwise projection is all
    of G x G, so only pairs need checking.
    """
    if G.name != "A5":
        raise ValueError("pairwise generation criterion requires a nonabelian simple group (A5)")
    exps = list(exponents)
    singles = {i: generated_order(G, [e]) for i, e in enumerate(exps)}
    pairs = {}
    for i, j in itertools.combinations(range(len(exps)), 2):
        pairs[(i, j)] = generated_order(G, [exps[i], exps[j]])
    ok = all(s == G.order for s in singles.values()) and all(
        p == G.order**2 for p in pairs.values())
    return GenerationReport(ok, pairs, singles, G.order ** len(exps))
