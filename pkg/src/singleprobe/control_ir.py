"""Control programs for the probe qubit.

A program is a list of words executed first-to-last.  Each word is either
an unconditional probe rotation ``(g, g, ..., g)`` or a conditional one
``(v^0, v^1, ..., v^(N-1))`` indexed by the register eigenvalue ``j``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .rotations import (
    DEFAULT_TOL,
    IDENTITY,
    AxisAngle,
    Rotation,
    compose,
    distance,
    from_axis_angle,
    is_order_two,
    power,
)


class SpectrumError(ValueError):
    """An eigenvalue outside the program's spectrum, or mismatched spectra."""


@dataclass(frozen=True)
class SpectrumSpec:
    """Integer eigenvalues of the normalised ``S_z`` (with multiplicity)."""

    eigenvalues: tuple[int, ...]
    n_qubits: int
    couplings: tuple[float, ...]

    def __post_init__(self):
        eig = tuple(int(e) for e in self.eigenvalues)
        if not eig:
            raise SpectrumError("spectrum must be nonempty")
        object.__setattr__(self, "eigenvalues", tuple(sorted(eig)))
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        if len(self.couplings) != self.n_qubits:
            raise SpectrumError("need one coupling per register qubit")

    @classmethod
    def from_couplings(cls, couplings: Sequence[float]) -> "SpectrumSpec":
        """Eigenvalue of basis state ``b`` is ``sum_j c_j b_j`` (integer couplings)."""
        cs = [float(c) for c in couplings]
        if any(c != round(c) for c in cs):
            raise SpectrumError("non-integer couplings: rescale the spectrum first")
        n = len(cs)
        eig = [sum(int(c) * ((b >> q) & 1) for q, c in enumerate(cs)) for b in range(2**n)]
        return cls(tuple(eig), n, tuple(cs))

    @classmethod
    def dyadic(cls, n_qubits: int) -> "SpectrumSpec":
        """Couplings ``2^j``: eigenvalues ``0..2^n-1``."""
        return cls.from_couplings([2**q for q in range(n_qubits)])

    @classmethod
    def consecutive(cls, size: int) -> "SpectrumSpec":
        """Eigenvalues ``0..size-1``; dyadic couplings when ``size`` is a power of two."""
        n = max(1, math.ceil(math.log2(size))) if size > 1 else 1
        if 2**n == size:
            return cls.dyadic(n)
        return cls(tuple(range(size)), n, tuple(float(2**q) for q in range(n)))

    @property
    def distinct(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.eigenvalues)))

    def to_json(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "n_qubits": self.n_qubits,
            "couplings": list(self.couplings),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpectrumSpec":
        if "eigenvalues" not in obj:
            return cls.from_couplings(obj["couplings"])
        return cls(tuple(obj["eigenvalues"]), int(obj["n_qubits"]), tuple(obj["couplings"]))


@dataclass(frozen=True)
class BoolFunc:
    """Two-valued function on the distinct eigenvalues of a spectrum."""

    table: tuple[tuple[int, int], ...]

    def __post_init__(self):
        items = tuple(sorted((int(j), int(v)) for j, v in dict(self.table).items()))
        if any(v not in (0, 1) for _, v in items):
            raise ValueError("BoolFunc values must be 0 or 1")
        object.__setattr__(self, "table", items)
        object.__setattr__(self, "_map", dict(items))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "BoolFunc":
        return cls(tuple((int(k), int(v)) for k, v in mapping.items()))

    @classmethod
    def from_callable(cls, spectrum: SpectrumSpec, fn: Callable[[int], int]) -> "BoolFunc":
        return cls(tuple((j, int(fn(j))) for j in spectrum.distinct))

    @classmethod
    def constant(cls, spectrum: SpectrumSpec, value: int) -> "BoolFunc":
        return cls.from_callable(spectrum, lambda j: value)

    @classmethod
    def parity(cls, spectrum: SpectrumSpec) -> "BoolFunc":
        return cls.from_callable(spectrum, lambda j: j % 2)

    @classmethod
    def indicator(cls, spectrum: SpectrumSpec, i: int, k: int) -> "BoolFunc":
        """1 iff ``j = i (mod 2^k)``."""
        return cls.from_callable(spectrum, lambda j: int((j - i) % (2**k) == 0))

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.table)

    def as_dict(self) -> dict[int, int]:
        return dict(self._map)

    def __call__(self, j: int) -> int:
        try:
            return self._map[j]
        except KeyError:
            raise SpectrumError(f"{j} is not in the function's domain") from None

    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.table)

    def is_constant(self) -> bool:
        return len(set(self.values())) <= 1

    def ones(self) -> tuple[int, ...]:
        return tuple(j for j, v in self.table if v)

    def __xor__(self, other: "BoolFunc") -> "BoolFunc":
        a, b = self.as_dict(), other.as_dict()
        if a.keys() != b.keys():
            raise SpectrumError("functions have different domains")
        return BoolFunc(tuple((j, a[j] ^ b[j]) for j in a))

    def __and__(self, other: "BoolFunc") -> "BoolFunc":
        a, b = self.as_dict(), other.as_dict()
        if a.keys() != b.keys():
            raise SpectrumError("functions have different domains")
        return BoolFunc(tuple((j, a[j] & b[j]) for j in a))

    def complement(self) -> "BoolFunc":
        return BoolFunc(tuple((j, 1 - v) for j, v in self.table))

    def to_json(self) -> dict:
        return {str(j): v for j, v in self.table}


class WordKind(enum.Enum):
    UNCONDITIONAL = "unconditional"
    CONDITIONAL = "conditional"


@dataclass(frozen=True)
class ControlWord:
    kind: WordKind
    base: Rotation

    def to_json(self) -> dict:
        aa = self.base.to_axis_angle()
        return {"kind": self.kind.value, "axis": list(aa.axis), "angle": aa.angle}

    @classmethod
    def from_json(cls, obj: dict) -> "ControlWord":
        base = from_axis_angle(AxisAngle(tuple(obj["axis"]), float(obj["angle"])))
        return cls(WordKind(obj["kind"]), base)


def Unconditional(g: Rotation) -> ControlWord:
    return ControlWord(WordKind.UNCONDITIONAL, g)


def Conditional(v: Rotation) -> ControlWord:
    return ControlWord(WordKind.CONDITIONAL, v)


@dataclass(frozen=True)
class Program:
    spectrum: SpectrumSpec
    words: tuple[ControlWord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))

    def __len__(self):
        return len(self.words)

    def to_json(self) -> dict:
        return {
            "spectrum": self.spectrum.to_json(),
            "words": [w.to_json() for w in self.words],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Program":
        return cls(
            SpectrumSpec.from_json(obj["spectrum"]),
            tuple(ControlWord.from_json(w) for w in obj["words"]),
        )


class _AnyWitness:
    """Marker returned by :func:`realizes` for the constant-0 function."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ANY"


ANY = _AnyWitness()


def eval_word(w: ControlWord, j: int) -> Rotation:
    if w.kind is WordKind.UNCONDITIONAL:
        return w.base
    return power(w.base, j)


def eval_program(p: Program, j: int) -> Rotation:
    if j not in p.spectrum.distinct:
        raise SpectrumError(f"eigenvalue {j} not in spectrum")
    out = IDENTITY
    for w in p.words:
        out = compose(eval_word(w, j), out)
    return out


def evaluate(p: Program) -> dict[int, Rotation]:
    return {j: eval_program(p, j) for j in p.spectrum.distinct}


def concat(p1: Program, p2: Program) -> Program:
    """Run ``p1`` then ``p2``."""
    if p1.spectrum != p2.spectrum:
        raise SpectrumError("cannot concatenate programs over different spectra")
    return Program(p1.spectrum, p1.words + p2.words)


def conjugate_program(p: Program, t: Rotation) -> Program:
    t_inv = t.inverse()
    words = tuple(ControlWord(w.kind, compose(t, compose(w.base, t_inv))) for w in p.words)
    return Program(p.spectrum, words)


def inverse_program(p: Program) -> Program:
    words = tuple(ControlWord(w.kind, w.base.inverse()) for w in reversed(p.words))
    return Program(p.spectrum, words)


def realizes(p: Program, f: BoolFunc, tol: float = DEFAULT_TOL):
    """Witness ``u`` if ``p`` evaluates to ``u^f(j)`` for every ``j``.

    Returns ``ANY`` for a constant-0 ``f`` realised by identities, and
    ``None`` when ``p`` does not realise ``f``.
    """
    if set(f.domain) != set(p.spectrum.distinct):
        raise SpectrumError("function domain differs from program spectrum")
    evals = evaluate(p)
    ones = f.ones()
    if not ones:
        ok = all(distance(r, IDENTITY) <= tol for r in evals.values())
        return ANY if ok else None
    u = evals[ones[0]]
    if not is_order_two(u, tol):
        return None
    for j, r in evals.items():
        expect = u if f(j) else IDENTITY
        if distance(r, expect) > tol:
            return None
    return u


def _angle_between(a: np.ndarray, b: np.ndarray) -> float:
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(a @ b))


def measures(p: Program, f: BoolFunc, s0: Sequence[float], tol: float = DEFAULT_TOL):
    """Outcome axis ``a``: f=0 branches end at ``a``, f=1 branches at ``-a``."""
    s0 = np.asarray(s0, dtype=float)
    if abs(np.linalg.norm(s0) - 1.0) > 1e-9:
        raise ValueError("initial Bloch vector must be a unit vector")
    if set(f.domain) != set(p.spectrum.distinct):
        raise SpectrumError("function domain differs from program spectrum")
    ends = {j: r.apply(s0) for j, r in evaluate(p).items()}
    j0 = f.domain[0]
    a = ends[j0] if f(j0) == 0 else -ends[j0]
    for j, s in ends.items():
        target = a if f(j) == 0 else -a
        if _angle_between(s, target) > tol:
            return None
    return a


def step_count(p: Program) -> tuple[int, int]:
    """(conditional, unconditional) word counts."""
    cond = sum(1 for w in p.words if w.kind is WordKind.CONDITIONAL)
    return cond, len(p.words) - cond


def bloch_trajectory(p: Program, s0: Sequence[float]) -> list[tuple[int, int, np.ndarray]]:
    """Rows ``(eigenvalue, step, bloch)``; step 0 is the initial vector."""
    s0 = np.asarray(s0, dtype=float)
    rows = []
    for j in p.spectrum.distinct:
        r = IDENTITY
        rows.append((j, 0, s0.copy()))
        for step, w in enumerate(p.words, start=1):
            r = compose(eval_word(w, j), r)
            rows.append((j, step, r.apply(s0)))
    return rows


def all_functions(spectrum: SpectrumSpec) -> Iterable[BoolFunc]:
    dom = spectrum.distinct
    for bits in itertools.product((0, 1), repeat=len(dom)):
        yield BoolFunc(tuple(zip(dom, bits)))
