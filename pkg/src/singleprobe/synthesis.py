"""Constructive compilation of two-valued functions into probe programs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .control_ir import (
    ANY,
    BoolFunc,
    Conditional,
    Program,
    SpectrumError,
    SpectrumSpec,
    Unconditional,
    concat,
    conjugate_program,
    realizes,
    step_count,
)
from .rotations import (
    DEFAULT_TOL,
    Rotation,
    Rx,
    Rz,
    aligning_rotation,
    power,
)

X_AXIS = (1.0, 0.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)
MAX_K = 20


class SynthesisError(RuntimeError):
    """A constructed program failed its realisation check."""


@dataclass(frozen=True)
class IndicatorSpec:
    """f(j) = 1 iff j = i (mod 2^k)."""

    i: int
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_K:
            raise ValueError(f"k must be in 1..{MAX_K}, got {self.k}")
        if not 0 <= self.i < 2**self.k:
            raise ValueError(f"i must satisfy 0 <= i < 2^k, got i={self.i}, k={self.k}")


@dataclass(frozen=True)
class SynthReport:
    program: Program
    target: BoolFunc
    witness: object  # Rotation or ANY
    conditional_steps: int
    recursion_depth: int = 0
    step_bound: int | None = None

    def to_json(self) -> dict:
        w = self.witness
        return {
            "conditional_steps": self.conditional_steps,
            "unconditional_steps": step_count(self.program)[1],
            "recursion_depth": self.recursion_depth,
            "step_bound": self.step_bound,
            "witness": "any" if w is ANY else w.to_json(),
            "mode": "realizes",
        }


def _report(program: Program, target: BoolFunc, depth: int = 0, bound: int | None = None,
            tol: float = DEFAULT_TOL) -> SynthReport:
    w = realizes(program, target, tol)
    if w is None:
        raise SynthesisError("constructed program does not realise its target")
    return SynthReport(program, target, w, step_count(program)[0], depth, bound)


def synth_parity(spec: SpectrumSpec) -> SynthReport:
    """One conditional half-turn: odd eigenvalues are flipped, even ones are not."""
    prog = Program(spec, (Conditional(Rx(math.pi)),))
    return _report(prog, BoolFunc.parity(spec))


def synth_constant(spec: SpectrumSpec, value: int) -> SynthReport:
    words = (Unconditional(Rx(math.pi)),) if value else ()
    return _report(Program(spec, words), BoolFunc.constant(spec, value))


def _witness_axis(level: int) -> tuple[float, float, float]:
    return X_AXIS if level % 2 == 1 else Z_AXIS


@lru_cache(maxsize=None)
def _indicator_program(spec: SpectrumSpec, i: int, k: int) -> Program:
    if k == 1:
        words = [Conditional(Rx(math.pi))]
        if i % 2 == 0:
            words.append(Unconditional(Rx(math.pi)))
        prog = Program(spec, tuple(words))
    else:
        inner = _indicator_program(spec, i, k - 1)
        half = 2 ** (k - 1)
        d = Rotation.about(_witness_axis(k), 2 * math.pi / 2 ** (k + 1))
        shift = i + half
        words = (
            (Conditional(d), Unconditional(power(d, -shift)))
            + inner.words
            + (Conditional(d.inverse()), Unconditional(power(d, shift)))
            + inner.words
        )
        prog = Program(spec, words)
    w = realizes(prog, BoolFunc.indicator(spec, i, k))
    if w is None:
        raise SynthesisError(f"indicator recursion failed at level k={k} (i={i})")
    return prog


def synth_indicator(spec: SpectrumSpec, ind: IndicatorSpec) -> SynthReport:
    """Recursive indicator construction; each level doubles the previous program.

    Level ``k+1`` conjugates two copies of the level-``k`` program by powers
    of a ``2pi/2^(k+2)`` rotation about an axis orthogonal to the level-``k``
    witness.  The new witness is the half-turn about that axis.
    """
    prog = _indicator_program(spec, ind.i, ind.k)
    return _report(prog, BoolFunc.indicator(spec, ind.i, ind.k), depth=ind.k)


def _align(report: SynthReport, axis) -> Program:
    if report.witness is ANY:
        return report.program
    t = aligning_rotation(report.witness.axis(), axis)
    return conjugate_program(report.program, t)


def synth_xor(r1: SynthReport, r2: SynthReport) -> SynthReport:
    if r1.program.spectrum != r2.program.spectrum:
        raise SpectrumError("cannot combine reports over different spectra")
    target = r1.target ^ r2.target
    if r2.witness is ANY:
        prog = r1.program
    elif r1.witness is ANY:
        prog = r2.program
    else:
        prog = concat(r1.program, _align(r2, r1.witness.axis()))
    bound = None
    if r1.step_bound is not None and r2.step_bound is not None:
        bound = r1.step_bound + r2.step_bound
    return _report(prog, target, max(r1.recursion_depth, r2.recursion_depth), bound)


@lru_cache(maxsize=1)
def and_pair() -> tuple[Rotation, Rotation, Rotation]:
    # lazy import: group_search depends on this module's reports
    from .group_search import build_group, find_and_pair

    return find_and_pair(build_group("S4"))


def synth_and(r1: SynthReport, r2: SynthReport) -> SynthReport:
    """Measure ``f ∧ g`` by running g, f, g, f with witnesses moved onto an
    octahedral pair (u, v) whose product ``uvuv`` is again a half-turn."""
    if r1.program.spectrum != r2.program.spectrum:
        raise SpectrumError("cannot combine reports over different spectra")
    spec = r1.program.spectrum
    target = r1.target & r2.target
    if r1.witness is ANY or r2.witness is ANY:
        return _report(Program(spec, ()), target)
    u, v, _ = and_pair()
    pf = _align(r1, u.axis())
    pg = _align(r2, v.axis())
    prog = reduce(concat, (pg, pf, pg, pf))
    bound = None
    if r1.step_bound is not None and r2.step_bound is not None:
        bound = 2 * (r1.step_bound + r2.step_bound)
    return _report(prog, target, max(r1.recursion_depth, r2.recursion_depth), bound)


def indicator_steps(k: int) -> int:
    """Conditional steps of the level-k indicator: C(1)=1, C(k+1)=2C(k)+2."""
    return 3 * 2 ** (k - 1) - 2


def point_resolution(spec: SpectrumSpec) -> int:
    """Smallest k0 >= 1 with 2^k0 larger than the spread of the spectrum."""
    eig = spec.distinct
    span = eig[-1] - eig[0]
    return max(1, math.ceil(math.log2(span + 1))) if span > 0 else 1


def synth_function(spec: SpectrumSpec, f: BoolFunc) -> SynthReport:
    """XOR of point indicators ``f_{i;k0}`` over the support of ``f``."""
    if set(f.domain) != set(spec.distinct):
        raise SpectrumError("function domain differs from spectrum")
    k0 = point_resolution(spec)
    ones = f.ones()
    bound = len(ones) * indicator_steps(k0)
    report = SynthReport(Program(spec, ()), BoolFunc.constant(spec, 0), ANY, 0, 0, 0)
    for i in ones:
        ind = synth_indicator(spec, IndicatorSpec(i % 2**k0, k0))
        report = synth_xor(report, ind)
    if report.target != f:
        raise SynthesisError("XOR of indicators does not reproduce the target")
    return SynthReport(report.program, f, report.witness, report.conditional_steps,
                       k0 if ones else 0, bound)


def synth_f32_d8(spec: SpectrumSpec) -> Program:
    """Three conditional D8 words separating j = 3 (mod 4) at the state level.

    With the probe on octagon vertex 0 (the +x axis), eigenvalues 3 and 7
    (mod 8) end on the antipode and all others return to vertex 0.
    """
    u = Rz(math.pi / 4)
    mirror = np.array([math.cos(math.pi / 4), math.sin(math.pi / 4), 0.0])  # through vertices 1, 5
    v = Rotation.about(mirror, math.pi)
    return Program(spec, (Conditional(u), Conditional(v), Conditional(u.inverse())))


def f32(spec: SpectrumSpec) -> BoolFunc:
    return BoolFunc.indicator(spec, 3, 2)


def detect_structure(spec: SpectrumSpec, f: BoolFunc) -> tuple[str, tuple]:
    """Classify ``f`` as constant, parity, an indicator, or generic."""
    if f.is_constant():
        return "constant", (f.values()[0],)
    if f == BoolFunc.parity(spec):
        return "parity", ()
    for k in range(1, point_resolution(spec) + 1):
        for i in range(2**k):
            if f == BoolFunc.indicator(spec, i, k):
                return "indicator", (i, k)
    return "generic", ()


def synth_auto(spec: SpectrumSpec, f: BoolFunc) -> SynthReport:
    """Cheapest constructive route: constant, parity, single indicator, else XOR."""
    kind, args = detect_structure(spec, f)
    if kind == "constant":
        return synth_constant(spec, *args)
    if kind == "parity":
        return synth_parity(spec)
    if kind == "indicator":
        return synth_indicator(spec, IndicatorSpec(*args))
    return synth_function(spec, f)
