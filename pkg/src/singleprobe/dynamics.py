"""Exact state-vector simulation of one probe qubit coupled to n register qubits.

Ordering: the probe is the most significant qubit of the joint index and
register qubit ``q`` is bit ``q`` of the register index (qubit 0 least
significant).  ``sigma_z |0> = +|0>``.

Time units are normalised so that integer eigenvalue ``j`` evolving for
time ``t`` rotates the probe Bloch vector by ``Rz(j t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .control_ir import Program, SpectrumError, WordKind
from .rotations import IDENTITY, Rotation, Rx, Ry

MAX_QUBITS = 12
DENSE_MAX_QUBITS = 6

I2 = np.eye(2, dtype=complex)
PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
AXES = ("x", "y", "z")

# rotations taking the z axis onto x and y: W sigma_z W^dag = sigma_alpha
FRAME = {"x": Ry(math.pi / 2), "y": Rx(-math.pi / 2), "z": IDENTITY}


class CapExceeded(ValueError):
    pass


def _check_cap(n: int, cap: int = MAX_QUBITS):
    if n > cap:
        raise CapExceeded(f"{n} register qubits exceeds the cap of {cap}")


def embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Single-qubit ``op`` on register qubit ``qubit`` of ``n``."""
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n)):
        out = np.kron(out, op if q == qubit else I2)
    return out


@dataclass(frozen=True, eq=False)
class RegisterOperator:
    axis: str
    couplings: tuple[float, ...]
    matrix: np.ndarray

    @property
    def n_qubits(self) -> int:
        return len(self.couplings)

    def diagonal(self) -> np.ndarray:
        if self.axis != "z":
            raise ValueError("only the z operator is diagonal")
        return np.real(np.diag(self.matrix))


def z_diagonal(couplings: Sequence[float]) -> np.ndarray:
    n = len(couplings)
    idx = np.arange(2**n)
    out = np.zeros(2**n)
    for q, c in enumerate(couplings):
        out += c * (1 - 2 * ((idx >> q) & 1))
    return out


def register_operator(axis: str, couplings: Sequence[float], cap: int = MAX_QUBITS) -> RegisterOperator:
    """``S_axis = sum_q c_q sigma_axis^(q)``."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    couplings = tuple(float(c) for c in couplings)
    n = len(couplings)
    _check_cap(n, cap)
    if axis == "z":
        m = np.diag(z_diagonal(couplings)).astype(complex)
    else:
        m = sum(c * embed(PAULI[axis], q, n) for q, c in enumerate(couplings))
        if n == 0:
            m = np.zeros((1, 1), dtype=complex)
    return RegisterOperator(axis, couplings, m)


@dataclass(frozen=True)
class NormalizedSpectrum:
    """``raw = offset + scale * label`` for every register basis state."""

    scale: float
    offset: float
    eigenvalues: tuple[int, ...]  # per basis state, in basis order
    probe_compensation: float  # rate of the sigma_z (x) 1 term removed by the shift
    residual: float = 0.0


def normalize_spectrum(op: RegisterOperator, tol: float = 1e-9) -> NormalizedSpectrum:
    """Affine map of the ``S_z`` diagonal onto integers.

    The label of basis state ``b`` is ``sum_q c_q b_q`` (times the rational
    rescaling factor when couplings are not integers), so dyadic couplings
    label each basis state by its own index.
    """
    from .compiler import rescale_spectrum  # rescaling lives with the compiler

    raw = op.diagonal()
    total = float(sum(op.couplings))
    weights = (total - raw) / 2
    ints, time_scale = rescale_spectrum(list(weights), tol)
    scale = -2.0 / time_scale
    labels = tuple(int(v) for v in ints)
    residual = float(np.max(np.abs(total + scale * np.array(labels) - raw))) if len(raw) else 0.0
    return NormalizedSpectrum(scale, total, labels, total, residual)


def labels_for(p_or_spec) -> np.ndarray:
    spec = getattr(p_or_spec, "spectrum", p_or_spec)
    ns = normalize_spectrum(register_operator("z", spec.couplings))
    if tuple(sorted(ns.eigenvalues)) != spec.eigenvalues:
        raise SpectrumError("spectrum eigenvalues do not match its couplings")
    return np.array(ns.eigenvalues)


# ---------------------------------------------------------------- states
@dataclass(frozen=True, eq=False)
class JointState:
    amplitudes: np.ndarray  # length 2^(n+1), probe most significant

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(len(self.amplitudes)))) - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Register vectors attached to probe |0> and |1>."""
        half = len(self.amplitudes) // 2
        return self.amplitudes[:half], self.amplitudes[half:]

    def probe_density(self) -> np.ndarray:
        a, b = self.blocks()
        return np.array([[np.vdot(a, a), np.vdot(b, a)], [np.vdot(a, b), np.vdot(b, b)]])

    def probe_bloch(self) -> np.ndarray:
        rho = self.probe_density()
        return np.real([np.trace(rho @ PAULI[ax]) for ax in AXES])

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "JointState":
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        return cls(amps)


def bloch_state(v: Sequence[float]) -> np.ndarray:
    """Pure qubit state with Bloch vector ``v``."""
    x, y, z = np.asarray(v, float) / np.linalg.norm(v)
    theta = math.atan2(math.hypot(x, y), z)  # acos(z) loses small tilts near the poles
    phi = math.atan2(y, x)
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def joint_state(probe: Sequence[float] | np.ndarray, register: np.ndarray) -> JointState:
    """Product state; ``probe`` is a Bloch vector (length 3) or a 2-vector."""
    probe = np.asarray(probe)
    psi = bloch_state(probe) if probe.shape == (3,) else probe.astype(complex)
    reg = np.asarray(register, dtype=complex)
    reg = reg / np.linalg.norm(reg)
    return JointState(np.kron(psi, reg))


def apply_probe(s: JointState, u: np.ndarray) -> JointState:
    a, b = s.blocks()
    return JointState(np.concatenate([u[0, 0] * a + u[0, 1] * b, u[1, 0] * a + u[1, 1] * b]))


def apply_register_local(s: JointState, u: np.ndarray, qubits: Sequence[int] | None = None) -> JointState:
    """``u`` on each listed register qubit (all by default)."""
    n = s.n_qubits
    qubits = range(n) if qubits is None else qubits
    t = s.amplitudes.reshape([2] * (n + 1))
    for q in qubits:
        ax = n - q  # tensor axis of register qubit q (axis 0 is the probe)
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [ax])), 0, ax)
    return JointState(t.reshape(-1))


def apply_frame(s: JointState, axis: str, inverse: bool = False) -> JointState:
    """Rotate probe and register together so sigma_z maps to sigma_axis."""
    if axis == "z":
        return s
    w = FRAME[axis].su2()
    if inverse:
        w = w.conj().T
    return apply_register_local(apply_probe(s, w), w)


def evolve_conditional(s: JointState, labels: Sequence[int] | NormalizedSpectrum, t: float,
                       axis: str = "z") -> JointState:
    """Probe rotation ``R_axis(j t)`` conditioned on register label ``j``.

    For ``axis`` x or y the register labels refer to the corresponding
    local eigenbasis; the evolution is the z evolution seen through the
    frame rotation.
    """
    if isinstance(labels, NormalizedSpectrum):
        labels = labels.eigenvalues
    lab = np.asarray(labels, dtype=float)
    s = apply_frame(s, axis, inverse=True)
    a, b = s.blocks()
    phase = np.exp(-0.5j * lab * t)
    s = JointState(np.concatenate([a * phase, b * phase.conj()]))
    return apply_frame(s, axis)


# ---------------------------------------------------------------- full Hamiltonian
def _axis_couplings(couplings) -> dict[str, np.ndarray]:
    c = np.asarray(couplings, dtype=float)
    if c.ndim == 1:
        return {ax: c for ax in AXES}
    if c.shape[0] != 3:
        raise ValueError("per-axis couplings must have shape (3, n)")
    return dict(zip(AXES, c))


def hamiltonian(couplings, extra_probe_field: float = 0.0, axes: Sequence[str] = AXES) -> np.ndarray:
    """``sum_alpha sigma_alpha (x) S_alpha`` (+ ``B sigma_z (x) 1``).

    ``couplings`` is one vector (isotropic exchange) or a 3 x n array of
    per-axis couplings.
    """
    per = _axis_couplings(couplings)
    n = len(per["z"])
    _check_cap(n)
    dim = 2**n
    h = np.zeros((2 * dim, 2 * dim), dtype=complex)
    for ax in axes:
        h += np.kron(PAULI[ax], register_operator(ax, per[ax]).matrix)
    if extra_probe_field:
        h += extra_probe_field * np.kron(PAULI["z"], np.eye(dim))
    return h


def unitary(h: np.ndarray, t: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * t * vals)) @ vecs.conj().T


def _term_step(s: JointState, ax: str, c: np.ndarray, dt: float) -> JointState:
    """Exact ``exp(-i dt sigma_ax (x) S_ax)`` via the frame rotation."""
    s = apply_frame(s, ax, inverse=True)
    diag = z_diagonal(c)
    a, b = s.blocks()
    phase = np.exp(-1j * dt * diag)
    s = JointState(np.concatenate([a * phase, b * phase.conj()]))
    return apply_frame(s, ax)


def evolve_full(s: JointState, couplings, t: float, steps: int = 100, method: str = "auto",
                extra_probe_field: float = 0.0) -> JointState:
    """Evolution under the full exchange Hamiltonian.

    Dense diagonalisation up to ``DENSE_MAX_QUBITS`` register qubits, first
    order Trotter splitting into the three ``sigma_a (x) S_a`` terms above.
    """
    per = _axis_couplings(couplings)
    n = len(per["z"])
    _check_cap(n)
    if method == "auto":
        method = "dense" if n <= DENSE_MAX_QUBITS else "trotter"
    if method == "dense":
        u = unitary(hamiltonian(couplings, extra_probe_field), t)
        return JointState(u @ s.amplitudes)
    if method != "trotter":
        raise ValueError("method must be 'auto', 'dense' or 'trotter'")
    dt = t / steps
    field = np.array([1.0, -1.0]) if extra_probe_field else None
    for _ in range(steps):
        for ax in AXES:
            s = _term_step(s, ax, per[ax], dt)
        if field is not None:
            s = apply_probe(s, np.diag(np.exp(-1j * dt * extra_probe_field * field)))
    return s


def state_distance(a: JointState | np.ndarray, b: JointState | np.ndarray) -> float:
    """Global-phase-insensitive distance ``sqrt(1 - |<a|b>|^2)`` (the pure-state
    trace distance), computed without cancellation."""
    va = np.asarray(getattr(a, "amplitudes", a), dtype=complex)
    vb = np.asarray(getattr(b, "amplitudes", b), dtype=complex)
    va = va / np.linalg.norm(va)
    vb = vb / np.linalg.norm(vb)
    ov = np.vdot(va, vb)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    # 1 - |ov| = |a - e^{i arg ov} b|^2 / 2
    gap = 0.5 * float(np.linalg.norm(va * phase - vb) ** 2)
    return math.sqrt(max(0.0, gap * (1.0 + abs(ov))))


@dataclass(frozen=True, eq=False)
class LeakageReport:
    parameter: float
    leakage: float
    state: JointState


def decouple_bangbang(s: JointState, couplings, keep_axis: str, total_t: float, m: int) -> LeakageReport:
    """Suppress the other two exchange terms with instantaneous probe pulses.

    ``m`` symmetric cycles ``free(tau/2) P free(tau) P free(tau/2)`` with
    ``P = i sigma_keep`` and ``tau = total_t / (2m)``.  Inside the pulse
    frame the two unwanted terms flip sign, so the average Hamiltonian is
    ``sigma_keep (x) S_keep``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    per = _axis_couplings(couplings)
    tau = total_t / (2 * m)
    h = hamiltonian(couplings)
    u_half = unitary(h, tau / 2)
    u_full = unitary(h, tau)
    pulse = np.kron(1j * PAULI[keep_axis], np.eye(len(s.amplitudes) // 2))
    cycle = u_half @ pulse @ u_full @ pulse @ u_half
    psi = s.amplitudes
    for _ in range(m):
        psi = cycle @ psi
    ideal = unitary(np.kron(PAULI[keep_axis], register_operator(keep_axis, per[keep_axis]).matrix),
                    total_t) @ s.amplitudes
    return LeakageReport(m, state_distance(psi, ideal), JointState(psi))


def decouple_strong_field(s: JointState, couplings, B: float, total_t: float,
                          steps: int = 200) -> LeakageReport:
    """Evolve under ``H + B sigma_z (x) 1`` and compare with the z-only interaction
    plus the same field (which commutes with it)."""
    if B < 0:
        raise ValueError("B must be non-negative")
    per = _axis_couplings(couplings)
    n = len(per["z"])
    full = evolve_full(s, couplings, total_t, steps=steps, extra_probe_field=B)
    h_ref = np.kron(PAULI["z"], np.diag(z_diagonal(per["z"])) + B * np.eye(2**n))
    ideal = unitary(h_ref, total_t) @ s.amplitudes
    return LeakageReport(B, state_distance(full, ideal), full)


def transverse_norm(couplings) -> float:
    """Operator norm of ``S_x``: the sum of absolute couplings."""
    return float(np.sum(np.abs(_axis_couplings(couplings)["x"])))


# ---------------------------------------------------------------- programs
def aligning_rotation_oriented(axis) -> Rotation:
    """Rotation taking +z onto ``axis`` (orientation respected)."""
    a = np.asarray(axis, float)
    a = a / np.linalg.norm(a)
    z = np.array([0.0, 0.0, 1.0])
    cross = np.cross(z, a)
    n = float(np.linalg.norm(cross))
    if n < 1e-14:
        return IDENTITY if a[2] > 0 else Rotation.about((1, 0, 0), math.pi)
    return Rotation.about(cross, math.atan2(n, float(a[2])))


def _run_words(s: JointState, words, labels, axis: str, inverse: bool) -> JointState:
    frame = FRAME[axis].su2()
    fd = frame.conj().T
    for w in words:
        if w.kind is WordKind.UNCONDITIONAL:
            u = w.base.su2()
            if inverse:
                u = u.conj().T
            s = apply_probe(s, frame @ u @ fd)
        else:
            v = w.base
            theta = v.angle()
            if theta == 0.0:
                continue
            t = aligning_rotation_oriented(v.axis()).su2()
            tl = frame @ t @ fd
            s = apply_probe(s, tl.conj().T)
            if inverse:
                # negative-time evolution via sigma_x conjugation of the probe
                flip = frame @ PAULI["x"] @ fd
                s = apply_probe(s, flip)
                s = evolve_conditional(s, labels, theta, axis)
                s = apply_probe(s, flip)
            else:
                s = evolve_conditional(s, labels, theta, axis)
            s = apply_probe(s, tl)
    return s


def run_program(p: Program, register: np.ndarray | JointState, probe_init: Sequence[float] | None = None,
                axis: str = "z") -> JointState:
    """Execute ``p`` on the joint state.

    Conditional words are free evolutions of time ``angle(v)`` conjugated so
    the rotation axis is ``axis(v)``; unconditional words are probe unitaries.
    For ``axis`` x/y all probe rotations are read in the rotated frame.
    """
    labels = labels_for(p)
    if isinstance(register, JointState):
        s = register
    else:
        reg = np.asarray(register, dtype=complex)
        if len(reg) != len(labels):
            raise SpectrumError(f"register dimension {len(reg)} != {len(labels)}")
        init = FRAME[axis].apply(probe_init if probe_init is not None else (0, 0, 1))
        s = joint_state(init, reg)
    if len(s.amplitudes) != 2 * len(labels):
        raise SpectrumError("joint state dimension does not match the program spectrum")
    return _run_words(s, p.words, labels, axis, inverse=False)


def run_inverse_program(p: Program, s: JointState, axis: str = "z") -> JointState:
    """Exact SU(2) inverse of :func:`run_program` (reversed words, negative times)."""
    labels = labels_for(p)
    return _run_words(s, tuple(reversed(p.words)), labels, axis, inverse=True)


def branch_unitaries(p: Program, axis: str = "z") -> dict[int, np.ndarray]:
    """Probe SU(2) operator applied in each eigenvalue branch (phases kept)."""
    labels = labels_for(p)
    out = {}
    for j in p.spectrum.distinct:
        b = int(np.nonzero(labels == j)[0][0])
        cols = []
        for probe in (np.array([1, 0]), np.array([0, 1])):
            reg = np.zeros(len(labels))
            reg[b] = 1
            s = run_program(p, joint_state(probe, reg) if axis == "z" else
                            apply_frame(joint_state(probe, reg), axis), axis=axis)
            if axis != "z":
                s = apply_frame(s, axis, inverse=True)
            a0, a1 = s.blocks()
            cols.append([a0[b], a1[b]])
        out[j] = np.array(cols).T
    return out


# ---------------------------------------------------------------- measurement
def probe_projector(a: Sequence[float], sign: int) -> np.ndarray:
    a = np.asarray(a, float) / np.linalg.norm(a)
    return 0.5 * (I2 + sign * sum(c * PAULI[ax] for c, ax in zip(a, AXES)))


def probe_probabilities(s: JointState, a: Sequence[float]) -> dict[int, float]:
    out = {}
    for sign in (+1, -1):
        proj = apply_probe(s, probe_projector(a, sign))
        out[sign] = float(np.vdot(proj.amplitudes, proj.amplitudes).real)
    return out


@dataclass(frozen=True, eq=False)
class Measurement:
    outcome: int  # +1 or -1
    probability: float
    register: np.ndarray  # collapsed, normalised register state
    joint: JointState  # post-measurement joint state


def probe_measure(s: JointState, a: Sequence[float], outcome: int | None = None,
                  rng: np.random.Generator | int | None = 0) -> Measurement:
    """Projective probe measurement along Bloch axis ``a`` with register collapse.

    ``outcome`` forces a branch; otherwise one is sampled from ``rng`` (a
    generator or a seed).
    """
    probs = probe_probabilities(s, a)
    if outcome is None:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        outcome = +1 if gen.random() < probs[+1] else -1
    if outcome not in (+1, -1):
        raise ValueError("outcome must be +1 or -1")
    p = probs[outcome]
    if p <= 1e-15:
        raise ValueError(f"outcome {outcome:+d} has zero probability")
    proj = apply_probe(s, probe_projector(a, outcome))
    joint = JointState(proj.amplitudes / math.sqrt(p))
    ket = bloch_state(np.asarray(a, float) * outcome)
    a0, a1 = joint.blocks()
    reg = ket.conj()[0] * a0 + ket.conj()[1] * a1
    reg = reg / np.linalg.norm(reg)
    return Measurement(outcome, p, reg, joint)


def sample_outcomes(s: JointState, a: Sequence[float], shots: int, seed: int) -> np.ndarray:
    probs = probe_probabilities(s, a)
    rng = np.random.default_rng(seed)
    return np.where(rng.random(shots) < probs[+1], 1, -1)


def trace_distance_pure(u: np.ndarray, v: np.ndarray) -> float:
    return state_distance(u, v)


def reduced_entropy(s: JointState) -> float:
    """Von Neumann entropy (nats) of the probe's reduced state."""
    vals = np.linalg.eigvalsh(s.probe_density())
    vals = vals[vals > 1e-16]
    return float(-np.sum(vals * np.log(vals)))
