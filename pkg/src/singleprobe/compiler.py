"""Gates from measurement programs, spectrum rescaling, and movable-probe schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .control_ir import ANY, BoolFunc, Program, SpectrumError, SpectrumSpec, Unconditional, conjugate_program, step_count
from .rotations import Rz, aligning_rotation
from .synthesis import SynthReport, synth_auto

MAX_DENOMINATOR = 10**6
COND_LIMIT = 1e10


class CompileError(RuntimeError):
    """The compiled protocol does not disentangle the probe or miss its target."""


class DegenerateGeometry(ValueError):
    """Coupling basis is singular or too ill-conditioned to schedule."""


# ---------------------------------------------------------------- rescaling
def _convergents(x: Fraction):
    """Continued-fraction convergents of ``x`` in order of growing denominator."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    while True:
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def rational_approx(x: float, tol: float, max_den: int = MAX_DENOMINATOR) -> Fraction:
    """First continued-fraction convergent within ``tol`` of ``x``."""
    for c in _convergents(Fraction(x)):
        if c.denominator > max_den:
            break
        if abs(float(c) - x) <= tol:
            return c
    raise ValueError(f"no rational within {tol} of {x} with denominator <= {max_den}")


def rescale_spectrum(raw: Sequence[float], tol: float = 1e-9,
                     max_den: int = MAX_DENOMINATOR) -> tuple[list[int], int]:
    """Integers ``m`` and time scale ``T`` with ``raw ~= m / T``; ``T`` is the
    least common multiple of the approximating denominators."""
    fracs = [rational_approx(float(x), tol, max_den) for x in raw]
    scale = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return [int(f * scale) for f in fracs], scale


# ---------------------------------------------------------------- gates
@dataclass(frozen=True, eq=False)
class GateProgram:
    """Probe protocol: init |0>, measure f, probe phase, measure f again."""

    spectrum: SpectrumSpec
    function: BoolFunc
    measurement: Program
    probe_phase: float  # phi in exp(i phi sigma_z) on the probe
    target_phase: float  # requested relative phase of the f=1 eigenspace
    axis: str = "z"
    synth: SynthReport | None = None

    def protocol(self) -> Program:
        phase_word = Unconditional(Rz(-2 * self.probe_phase))
        return Program(self.spectrum, self.measurement.words + (phase_word,) + self.measurement.words)

    @property
    def conditional_steps(self) -> int:
        return 2 * step_count(self.measurement)[0]


@dataclass(frozen=True, eq=False)
class GateReport:
    unitary: np.ndarray
    fidelity: float
    probe_residual: float
    conditional_steps: int

    def to_json(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "probe_residual": self.probe_residual,
            "conditional_steps": self.conditional_steps,
        }


def _register_labels(spec: SpectrumSpec) -> np.ndarray:
    from .dynamics import labels_for

    return labels_for(spec)


def simulate_protocol(prog: Program, axis: str = "z") -> tuple[np.ndarray, float]:
    """Register unitary (probe projected back onto its initial state) and the
    worst-case probability of the probe not returning."""
    from .dynamics import FRAME, bloch_state, run_program

    dim = 2**prog.spectrum.n_qubits
    ket0 = bloch_state(FRAME[axis].apply((0, 0, 1)))
    cols = []
    residual = 0.0
    for b in range(dim):
        reg = np.zeros(dim, dtype=complex)
        reg[b] = 1
        out = run_program(prog, reg, (0, 0, 1), axis=axis)
        a0, a1 = out.blocks()
        col = ket0.conj()[0] * a0 + ket0.conj()[1] * a1
        residual = max(residual, 1.0 - float(np.vdot(col, col).real))
        cols.append(col)
    return np.array(cols).T, residual


def gate_fidelity(target: np.ndarray, actual: np.ndarray) -> float:
    """``|Tr(T^dag U)| / d``: 1 iff equal up to a global phase."""
    return float(abs(np.trace(target.conj().T @ actual)) / target.shape[0])


def _relative_phase(unitary: np.ndarray, f: BoolFunc, labels: np.ndarray) -> float:
    d = np.diag(unitary)
    b1 = int(np.nonzero([f(j) == 1 for j in labels])[0][0])
    b0 = int(np.nonzero([f(j) == 0 for j in labels])[0][0])
    return float(np.angle(d[b1] / d[b0]))


def _frame_matrix(n: int, axis: str) -> np.ndarray:
    from .dynamics import FRAME

    w = FRAME[axis].su2()
    out = np.array([[1.0 + 0j]])
    for _ in range(n):
        out = np.kron(out, w)
    return out


def diagonal_target(spec: SpectrumSpec, f: BoolFunc, phase: float, axis: str = "z") -> np.ndarray:
    labels = _register_labels(spec)
    d = np.diag(np.exp(1j * phase * np.array([f(j) for j in labels])))
    w = _frame_matrix(spec.n_qubits, axis)
    return w @ d @ w.conj().T


def compile_diagonal(f: BoolFunc, phase: float, spec: SpectrumSpec, axis: str = "z",
                     report: SynthReport | None = None) -> GateProgram:
    """Two-eigenphase diagonal gate: the f=1 eigenspace gets relative phase ``phase``.

    The achieved phase as a function of the probe phase is measured by
    simulation (two calibration runs) and inverted, so SU(2) lift signs
    never need to be predicted.
    """
    report = report or synth_auto(spec, f)
    if f.is_constant():
        return GateProgram(spec, f, Program(spec, ()), 0.0, phase, axis, report)
    meas = report.program
    if report.witness is not ANY:
        # the witness axis must be orthogonal to the probe's initial z axis
        meas = conjugate_program(meas, aligning_rotation(report.witness.axis(), (1, 0, 0)))
    labels = _register_labels(spec)

    def achieved(phi):
        g = GateProgram(spec, f, meas, phi, phase, "z")
        u, res = simulate_protocol(g.protocol())
        if res > 1e-9:
            raise CompileError(f"probe does not disentangle (residual {res:.3g})")
        return _relative_phase(u, f, labels)

    d0 = achieved(0.0)
    slope = math.remainder(achieved(math.pi / 4) - d0, 2 * math.pi) / (math.pi / 4)
    if abs(abs(slope) - 2) > 1e-6:
        raise CompileError(f"unexpected phase response {slope:.6g}")
    phi = math.remainder((phase - d0) / slope, math.pi)
    return GateProgram(spec, f, meas, phi, phase, axis, report)


def verify_gate(g: GateProgram, target: np.ndarray) -> GateReport:
    u, residual = simulate_protocol(g.protocol(), g.axis)
    return GateReport(u, gate_fidelity(target, u), residual, g.conditional_steps)


def _bit_function(spec: SpectrumSpec, predicate) -> BoolFunc:
    labels = _register_labels(spec)
    if len(set(labels.tolist())) != len(labels):
        raise SpectrumError("gate compilation needs distinct eigenvalues per basis state")
    by_label = {int(j): b for b, j in enumerate(labels)}
    return BoolFunc.from_callable(spec, lambda j: int(predicate(by_label[j])))


def controlled_phase_function(spec: SpectrumSpec, targets: Sequence[int]) -> BoolFunc:
    return _bit_function(spec, lambda b: all((b >> q) & 1 for q in targets))


def compile_controlled_phase(targets: Sequence[int], phase: float, spec: SpectrumSpec) -> GateProgram:
    """Phase ``phase`` on the all-ones subspace of ``targets`` (AND of their bits)."""
    targets = list(targets)
    if len(targets) < 2 or len(set(targets)) != len(targets):
        raise ValueError("need at least two distinct target qubits")
    if any(not 0 <= q < spec.n_qubits for q in targets):
        raise ValueError("target qubit out of range")
    return compile_diagonal(controlled_phase_function(spec, targets), phase, spec)


def compile_local_rotation(qubit: int, axis: str, theta: float, spec: SpectrumSpec) -> GateProgram:
    """``exp(i theta sigma_axis^(qubit))`` via the bit-value function and the
    ``sigma_axis (x) S_axis`` interaction."""
    if not 0 <= qubit < spec.n_qubits:
        raise ValueError("qubit out of range")
    f = _bit_function(spec, lambda b: (b >> qubit) & 1)
    # eigenvalue e^{i theta} on bit 0, e^{-i theta} on bit 1
    return compile_diagonal(f, -2 * theta, spec, axis=axis)


def local_rotation_target(n: int, qubit: int, axis: str, theta: float) -> np.ndarray:
    from .dynamics import PAULI, embed

    return embed(np.cos(theta) * np.eye(2) + 1j * np.sin(theta) * PAULI[axis], qubit, n)


def controlled_phase_target(n: int, targets: Sequence[int], phase: float) -> np.ndarray:
    idx = np.arange(2**n)
    on = np.all([(idx >> q) & 1 for q in targets], axis=0)
    return np.diag(np.exp(1j * phase * on))


# H = exp(-i pi/4 Z) exp(-i pi/4 X) exp(-i pi/4 Z) up to global phase
HADAMARD_EULER = (("z", -math.pi / 4), ("x", -math.pi / 4), ("z", -math.pi / 4))


def compile_hadamard(qubit: int, spec: SpectrumSpec) -> list[GateProgram]:
    """Hadamard as three local rotations, executed in list order (last factor first)."""
    return [compile_local_rotation(qubit, ax, th, spec) for ax, th in reversed(HADAMARD_EULER)]


# ---------------------------------------------------------------- movable probe
def coupling_from_geometry(nuclei: Sequence[Sequence[float]], electron: Sequence[float],
                           exponent: float = 3.0) -> np.ndarray:
    """``c_j = d_j^-p`` for distances ``d_j`` between electron and nucleus j."""
    nuc = np.atleast_2d(np.asarray(nuclei, dtype=float))
    e = np.asarray(electron, dtype=float)
    d = np.linalg.norm(nuc - e, axis=1)
    if np.any(d == 0):
        raise ValueError("electron coincides with a nucleus")
    return d ** (-float(exponent))


@dataclass(frozen=True, eq=False)
class CouplingBasis:
    positions: tuple[str, ...]
    vectors: np.ndarray  # row i: coupling vector at position i

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.positions):
            raise ValueError("coupling basis must be n x n with one label per row")
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "positions", tuple(self.positions))

    @classmethod
    def identity(cls, n: int) -> "CouplingBasis":
        return cls(tuple(f"P{i + 1}" for i in range(n)), np.eye(n))

    @classmethod
    def from_geometry(cls, nuclei, electrons, exponent: float = 3.0) -> "CouplingBasis":
        rows = [coupling_from_geometry(nuclei, e, exponent) for e in electrons]
        return cls(tuple(f"P{i + 1}" for i in range(len(rows))), np.array(rows))

    @property
    def n(self) -> int:
        return len(self.positions)

    def to_json(self) -> dict:
        return {"positions": list(self.positions), "vectors": self.vectors.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "CouplingBasis":
        """Accepts ``{"vectors", "positions"?}`` or ``{"nuclei", "electrons", "exponent"?}``."""
        if "vectors" not in obj:
            return cls.from_geometry(obj["nuclei"], obj["electrons"], obj.get("exponent", 3.0))
        vectors = np.array(obj["vectors"], dtype=float)
        positions = obj.get("positions") or [f"P{i + 1}" for i in range(len(vectors))]
        return cls(tuple(positions), vectors)


@dataclass(frozen=True)
class Segment:
    position: str
    duration: float
    sign_flip: bool


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple[Segment, ...]
    target_coupling: tuple[float, ...]

    @property
    def total_time(self) -> float:
        return sum(s.duration for s in self.segments)

    def to_json(self) -> dict:
        return {
            "segments": [
                {"position": s.position, "duration": s.duration, "sign_flip": s.sign_flip}
                for s in self.segments
            ],
            "target_coupling": list(self.target_coupling),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PulseSchedule":
        segs = tuple(Segment(s["position"], float(s["duration"]), bool(s["sign_flip"]))
                     for s in obj["segments"])
        return cls(segs, tuple(obj["target_coupling"]))


def solve_schedule(target: Sequence[float], basis: CouplingBasis,
                   cond_limit: float = COND_LIMIT) -> PulseSchedule:
    """Write ``target = sum_j d_j C_j`` and dwell ``|d_j|`` at position j,
    flipping the probe (i sigma_x before and after) when ``d_j < 0``."""
    C = np.asarray(target, dtype=float)
    if C.shape != (basis.n,):
        raise ValueError(f"target coupling must have length {basis.n}")
    cond = np.linalg.cond(basis.vectors)
    if not np.isfinite(cond) or cond > cond_limit:
        raise DegenerateGeometry(f"coupling basis condition number {cond:.3g} exceeds {cond_limit:g}")
    d = np.linalg.solve(basis.vectors.T, C)
    segs = tuple(
        Segment(basis.positions[j], float(abs(dj)), bool(dj < 0))
        for j, dj in enumerate(d)
        if dj != 0.0
    )
    return PulseSchedule(segs, tuple(float(c) for c in C))


@dataclass(frozen=True, eq=False)
class ScheduleCheck:
    scheduled: np.ndarray
    target: np.ndarray
    error: float  # operator 2-norm of the difference


def schedule_to_operator(sched: PulseSchedule, basis: CouplingBasis) -> ScheduleCheck:
    """Multiply out the segment evolutions and compare with
    ``exp(-i sigma_z (x) S_z(C))`` for unit time."""
    from .dynamics import PAULI, z_diagonal

    n = basis.n
    dim = 2 ** (n + 1)
    flip = np.kron(PAULI["x"], np.eye(2**n))
    row = {p: i for i, p in enumerate(basis.positions)}
    u = np.eye(dim, dtype=complex)
    for seg in sched.segments:
        diag = np.kron([1.0, -1.0], z_diagonal(basis.vectors[row[seg.position]]))
        step = np.diag(np.exp(-1j * seg.duration * diag))
        if seg.sign_flip:
            step = flip @ step @ flip
        u = step @ u
    target = np.diag(np.exp(-1j * np.kron([1.0, -1.0], z_diagonal(sched.target_coupling))))
    return ScheduleCheck(u, target, float(np.linalg.norm(u - target, ord=2)))


def two_qubit_coupling(n: int, i: int, j: int) -> tuple[float, ...]:
    """Effective coupling with 1 at qubit i and 2 at qubit j."""
    c = [0.0] * n
    c[i], c[j] = 1.0, 2.0
    return tuple(c)


@dataclass(frozen=True)
class CostRow:
    n: int
    fixed_conditional_steps: int
    movable_conditional_steps: int
    movable_positions_local: int
    movable_positions_generic: int
    gate_model_cphase_for_conditional_word: int


def cost_row(n: int, seed: int = 0) -> CostRow:
    """Controlled phase on the two most strongly coupled qubits (n-2, n-1).

    Fixed dyadic couplings need the generic XOR construction; a movable
    probe schedules the effective coupling (..1..2..) and reuses the
    two-qubit AND procedure.
    """
    from .synthesis import synth_auto

    fixed_spec = SpectrumSpec.dyadic(n)
    f_fixed = controlled_phase_function(fixed_spec, [n - 2, n - 1])
    fixed_steps = 2 * synth_auto(fixed_spec, f_fixed).conditional_steps

    C = two_qubit_coupling(n, n - 2, n - 1)
    eff = SpectrumSpec.from_couplings(C)
    f_eff = BoolFunc.indicator(eff, 3, 2)
    movable_steps = 2 * synth_auto(eff, f_eff).conditional_steps

    local = solve_schedule(C, CouplingBasis.identity(n))
    rng = np.random.default_rng(seed)
    nuclei = rng.uniform(-1, 1, size=(n, 3))
    electrons = nuclei + rng.normal(scale=0.3, size=(n, 3))
    generic = solve_schedule(C, CouplingBasis.from_geometry(nuclei, electrons))
    return CostRow(n, fixed_steps, movable_steps, len(local.segments), len(generic.segments), n)
