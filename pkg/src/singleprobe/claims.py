"""Executable checks for the headline claims; used by the test suite and ``report``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import compiler, dynamics
from .control_ir import (
    ANY,
    BoolFunc,
    SpectrumSpec,
    all_functions,
    bloch_trajectory,
    measures,
    realizes,
    step_count,
)
from .group_search import (
    bfs_search,
    build_group,
    enumerate_onestep,
    find_and_pair,
    generated_order,
    verify_generation_pairwise,
)
from .rotations import distance, is_order_two, orthogonal_vector
from .synthesis import (
    IndicatorSpec,
    f32,
    synth_and,
    synth_f32_d8,
    synth_function,
    synth_indicator,
    synth_parity,
)

TOL = 1e-9

# octagon positions (degrees) after each D8 word, eigenvalues 0..7, probe at vertex 0
OCTAGON_ANGLES = {
    1: [0, 45, 90, 135, 180, 225, 270, 315],
    2: [0, 45, 90, 315, 180, 225, 270, 135],
    3: [0, 0, 0, 180, 0, 0, 0, 180],
}


@dataclass
class ClaimResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s / {self.limit:g}s)"


def _timed(number: int, name: str, limit: float, fn: Callable[[], tuple[bool, str]]) -> ClaimResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    return ClaimResult(number, name, bool(ok) and dt < limit, detail, dt, limit)


def parity_one_step() -> tuple[bool, str]:
    ok = True
    for N in (2, 4, 8, 16):
        spec = SpectrumSpec.consecutive(N)
        rep = synth_parity(spec)
        ok &= step_count(rep.program) == (1, 0)
        ok &= realizes(rep.program, BoolFunc.parity(spec), TOL) is not None
    spec8 = SpectrumSpec.dyadic(3)
    found = enumerate_onestep(build_group("D8"), spec8)
    ok &= found == [BoolFunc.parity(spec8)]
    return ok, f"one-step functions on N=8 over D8: {[f.values() for f in found]}"


def d8_figure() -> tuple[bool, str]:
    spec = SpectrumSpec.dyadic(3)
    prog = synth_f32_d8(spec)
    ok = True
    worst = 0.0
    for j, step, v in bloch_trajectory(prog, (1, 0, 0)):
        if step == 0:
            continue
        ang = math.radians(OCTAGON_ANGLES[step][j])
        err = float(np.linalg.norm(v - [math.cos(ang), math.sin(ang), 0.0]))
        worst = max(worst, err)
    ok &= worst <= TOL
    a = measures(prog, f32(spec), (1, 0, 0), TOL)
    ok &= a is not None and np.allclose(a, (1, 0, 0), atol=TOL)
    ok &= realizes(prog, f32(spec), TOL) is None
    res = bfs_search(build_group("D8"), spec, f32(spec), "state_level", s0=(1, 0, 0), max_len=3)
    ok &= res is not None and res.length == 3
    return ok, f"max snapshot error {worst:.2e}; bfs length {None if res is None else res.length}"


def recursion() -> tuple[bool, str]:
    spec = SpectrumSpec.dyadic(4)
    ok = True
    counts = {}
    for k in range(1, 5):
        for i in range(2**k):
            rep = synth_indicator(spec, IndicatorSpec(i, k))
            ok &= realizes(rep.program, BoolFunc.indicator(spec, i, k), TOL) is not None
            counts.setdefault(k, set()).add(rep.conditional_steps)
    ok &= all(len(c) == 1 for c in counts.values())
    c = {k: next(iter(v)) for k, v in counts.items()}
    ok &= c[1] == 1 and all(c[k + 1] == 2 * c[k] + 2 for k in range(1, 4))
    return ok, f"conditional steps by level {c}"


def composition(seed: int = 0, pairs: int = 20) -> tuple[bool, str]:
    spec = SpectrumSpec.dyadic(3)
    funcs = list(all_functions(spec))
    ok = True
    for f in funcs:
        ok &= realizes(synth_function(spec, f).program, f, TOL) is not None
    _, _, w = find_and_pair(build_group("S4"))
    rng = np.random.default_rng(seed)
    done = 0
    while done < pairs:
        f, g = (funcs[int(k)] for k in rng.integers(0, len(funcs), 2))
        if (f & g).is_constant():
            continue  # only pairs whose conjunction is a real measurement
        rep = synth_and(synth_function(spec, f), synth_function(spec, g))
        wit = realizes(rep.program, f & g, TOL)
        ok &= wit is not None and wit is not ANY and is_order_two(wit, TOL)
        ok &= wit is not None and wit is not ANY and distance(wit, w) <= TOL
        done += 1
    return ok, f"{len(funcs)} XOR syntheses, {pairs} AND syntheses"


def a5_generation() -> tuple[bool, str]:
    G = build_group("A5")
    rep = verify_generation_pairwise(G, range(30))
    ok = rep.ok and len(rep.pairs) == 435 and all(v == 3600 for v in rep.pairs.values())
    direct = {
        (0, 1): generated_order(G, [0, 1]),
        (0, 1, 2): generated_order(G, [0, 1, 2]),
        (3, 11, 29): generated_order(G, [3, 11, 29]),
    }
    ok &= all(v == 60 ** len(k) for k, v in direct.items())
    return ok, f"435 pairs full: {rep.ok}; direct BFS orders {direct}"


def gate_fidelity() -> tuple[bool, str]:
    spec = SpectrumSpec.dyadic(2)
    cz = compiler.compile_controlled_phase([0, 1], math.pi, spec)
    rep = compiler.verify_gate(cz, compiler.controlled_phase_target(2, [0, 1], math.pi))
    h = np.eye(4, dtype=complex)
    worst_res = rep.probe_residual
    for g in compiler.compile_hadamard(1, spec):
        u, res = compiler.simulate_protocol(g.protocol(), g.axis)
        worst_res = max(worst_res, res)
        h = u @ h
    cnot = h @ rep.unitary @ h
    target = np.eye(4)[:, [0, 3, 2, 1]]  # control qubit 0, target qubit 1
    f_cnot = compiler.gate_fidelity(target, cnot)
    ok = rep.fidelity >= 1 - TOL and 1 - worst_res >= 1 - TOL and f_cnot >= 1 - TOL
    return ok, f"CZ fidelity {rep.fidelity:.12f}; CNOT fidelity {f_cnot:.12f}; probe residual {worst_res:.1e}"


def schedule_exactness(seed: int = 0, count: int = 100) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for trial in range(count):
        n = 1 + trial % 6
        basis = compiler.CouplingBasis(tuple(f"P{i}" for i in range(n)), rng.normal(size=(n, n)))
        target = rng.uniform(-2, 2, size=n)
        sched = compiler.solve_schedule(target, basis)
        worst = max(worst, compiler.schedule_to_operator(sched, basis).error)
    return worst <= 1e-12, f"worst operator-norm error {worst:.2e} over {count} bases"


def decoupling(seed: int = 0, instances: int = 10) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    ok = True
    for k in range(instances):
        c = rng.uniform(0.1, 1.0, size=2)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        s = dynamics.JointState(psi / np.linalg.norm(psi))
        ax = ("x", "y", "z")[k % 3]
        bb = [dynamics.decouple_bangbang(s, c, ax, 1.0, m).leakage for m in (1, 2, 4, 8, 16, 32, 64)]
        ok &= all(b < a for a, b in zip(bb, bb[1:]))
        nx = dynamics.transverse_norm(c)
        sf = [dynamics.decouple_strong_field(s, c, f * nx, 1.0).leakage for f in (10, 30, 100)]
        ok &= all(b < a for a, b in zip(sf, sf[1:]))
    return ok, f"{instances} random n=2 instances; last bang-bang leakage {bb[0]:.2e} -> {bb[-1]:.2e}"


def collapse_cases(max_n: int = 3):
    """(program, function, s0) for every synthesised measurement with N <= 2^max_n."""
    for n in range(1, max_n + 1):
        spec = SpectrumSpec.dyadic(n)
        reports = [synth_parity(spec)]
        for k in range(1, n + 1):
            reports += [synth_indicator(spec, IndicatorSpec(i, k)) for i in range(2**k)]
        for rep in reports:
            yield rep.program, rep.target, orthogonal_vector(rep.witness.axis())
    spec = SpectrumSpec.dyadic(3)
    yield synth_f32_d8(spec), f32(spec), np.array([1.0, 0.0, 0.0])


def collapse_check(prog, f, s0, rng, shots: int = 10_000, seed: int = 0) -> tuple[float, float]:
    """(worst trace distance to the projector oracle, worst shot deviation in sigmas)."""
    a = measures(prog, f, s0, TOL)
    if a is None:
        raise AssertionError("program does not measure its function")
    labels = dynamics.labels_for(prog)
    dim = len(labels)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    out = dynamics.run_program(prog, psi, s0)
    worst_td, worst_sigma = 0.0, 0.0
    probs = dynamics.probe_probabilities(out, a)
    for outcome, b in ((+1, 0), (-1, 1)):
        proj = np.array([f(int(j)) == b for j in labels], dtype=float) * psi
        p = float(np.vdot(proj, proj).real)
        if abs(probs[outcome] - p) > TOL:
            worst_td = max(worst_td, abs(probs[outcome] - p))
        if p < 1e-12:
            continue
        m = dynamics.probe_measure(out, a, outcome=outcome)
        # populations of the raw collapse
        worst_td = max(worst_td, float(np.max(np.abs(np.abs(m.register) ** 2 - np.abs(proj) ** 2 / p))))
        back = dynamics.run_inverse_program(prog, m.joint)
        ket = dynamics.bloch_state(s0)
        a0, a1 = back.blocks()
        reg = ket.conj()[0] * a0 + ket.conj()[1] * a1
        worst_td = max(worst_td, 1 - float(np.vdot(reg, reg).real))
        worst_td = max(worst_td, dynamics.trace_distance_pure(reg, proj))
    shots_out = dynamics.sample_outcomes(out, a, shots, seed)
    p_plus = probs[+1]
    sigma = math.sqrt(max(p_plus * (1 - p_plus), 1e-300) / shots)
    freq = float(np.mean(shots_out == 1))
    if p_plus * (1 - p_plus) < 1e-12:
        worst_sigma = 0.0 if abs(freq - p_plus) < 1e-12 else math.inf
    else:
        worst_sigma = abs(freq - p_plus) / sigma
    return worst_td, worst_sigma


def collapse_oracle(seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst_td, worst_sigma, count = 0.0, 0.0, 0
    for k, (prog, f, s0) in enumerate(collapse_cases()):
        td, sg = collapse_check(prog, f, s0, rng, seed=seed + k)
        worst_td, worst_sigma = max(worst_td, td), max(worst_sigma, sg)
        count += 1
    return worst_td <= TOL and worst_sigma <= 3.0, (
        f"{count} measurements; worst trace distance {worst_td:.1e}; worst shot deviation {worst_sigma:.2f} sigma")


def cost_report() -> tuple[bool, str]:
    rows = [compiler.cost_row(n) for n in (3, 4, 5)]
    movable = [r.movable_conditional_steps for r in rows]
    fixed = [r.fixed_conditional_steps for r in rows]
    # fixed cost tracks 2^k0: at least doubling with each extra qubit
    ok = len(set(movable)) == 1 and all(b >= 2 * a for a, b in zip(fixed, fixed[1:]))
    ok &= all(m < f for m, f in zip(movable, fixed))
    ok &= all(r.movable_positions_local == 2 for r in rows)
    return ok, f"fixed {fixed} vs movable {movable} conditional steps for n=3,4,5"


CLAIMS = [
    (1, "parity in one step", 1.0, parity_one_step),
    (2, "D8 procedure / octagon snapshots", 10.0, d8_figure),
    (3, "indicator recursion", 30.0, recursion),
    (4, "XOR / AND composition", 120.0, composition),
    (5, "A5 generation", 300.0, a5_generation),
    (6, "gate fidelity", 60.0, gate_fidelity),
    (7, "schedule exactness", 60.0, schedule_exactness),
    (8, "decoupling convergence", 60.0, decoupling),
    (9, "collapse oracle", 120.0, collapse_oracle),
    (10, "cost report", 60.0, cost_report),
]


def run_claim(number: int) -> ClaimResult:
    for num, name, limit, fn in CLAIMS:
        if num == number:
            return _timed(num, name, limit, fn)
    raise KeyError(number)


def run_all() -> list[ClaimResult]:
    return [run_claim(num) for num, *_ in CLAIMS]
