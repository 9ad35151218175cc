"""SO(3) rotations stored as unit quaternions with a canonical sign.

Composition convention: ``compose(a, b)`` applies ``b`` first, then ``a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-9
# components smaller than this never decide the canonical sign
_SIGN_EPS = 1e-12


def _canonical(q: Sequence[float]) -> tuple[float, float, float, float]:
    arr = np.asarray(q, dtype=float)
    norm = float(np.sqrt(arr @ arr))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError(f"cannot normalise quaternion {tuple(q)}")
    arr = arr / norm
    for c in arr:
        if abs(c) > _SIGN_EPS:
            if c < 0:
                arr = -arr
            break
    return tuple(float(c) + 0.0 for c in arr)  # type: ignore[return-value]


@dataclass(frozen=True)
class AxisAngle:
    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        n = float(np.linalg.norm(axis))
        if not n > 0 or not math.isfinite(n):
            raise ValueError("rotation axis must be a nonzero finite vector")
        object.__setattr__(self, "axis", tuple(float(c) for c in axis / n))
        # wrap into (-pi, pi]
        a = math.remainder(float(self.angle), 2 * math.pi)
        if a <= -math.pi:
            a += 2 * math.pi
        object.__setattr__(self, "angle", a)


@dataclass(frozen=True)
class Rotation:
    """A rotation of the Bloch sphere; ``q = (w, x, y, z)``."""

    q: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "q", _canonical(self.q))

    # construction -----------------------------------------------------
    @classmethod
    def identity(cls) -> "Rotation":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def about(cls, axis: Sequence[float], angle: float) -> "Rotation":
        return from_axis_angle(AxisAngle(tuple(axis), angle))

    # views ------------------------------------------------------------
    @property
    def w(self) -> float:
        return self.q[0]

    @property
    def vec(self) -> np.ndarray:
        return np.array(self.q[1:])

    def angle(self) -> float:
        """Rotation angle in [0, pi]."""
        return 2.0 * math.atan2(float(np.linalg.norm(self.vec)), abs(self.w))

    def axis(self) -> np.ndarray:
        """Unit rotation axis oriented so the angle is in [0, pi]; z for the identity."""
        v = self.vec
        n = float(np.linalg.norm(v))
        if n < 1e-15:
            return np.array([0.0, 0.0, 1.0])
        return v / n if self.w >= 0 else -v / n

    def to_axis_angle(self) -> AxisAngle:
        return AxisAngle(tuple(self.axis()), self.angle())

    def inverse(self) -> "Rotation":
        w, x, y, z = self.q
        return Rotation((w, -x, -y, -z))

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def apply(self, v: Sequence[float]) -> np.ndarray:
        return self.matrix() @ np.asarray(v, dtype=float)

    def su2(self) -> np.ndarray:
        """SU(2) lift ``w*I - i(x X + y Y + z Z)`` (non-negative scalar part
        except for 180 degree rotations, where the canonical sign decides)."""
        w, x, y, z = self.q
        return np.array([
            [w - 1j * z, -1j * x - y],
            [-1j * x + y, w + 1j * z],
        ])

    def to_json(self) -> dict:
        return {"q": list(self.q)}

    @classmethod
    def from_json(cls, obj: dict) -> "Rotation":
        return cls(tuple(obj["q"]))

    def __matmul__(self, other: "Rotation") -> "Rotation":
        return compose(self, other)

    def __repr__(self):
        aa = self.to_axis_angle()
        ax = ", ".join(f"{c:.4g}" for c in aa.axis)
        return f"Rotation(axis=({ax}), angle={math.degrees(aa.angle):.6g}deg)"


def from_axis_angle(a: AxisAngle) -> Rotation:
    half = 0.5 * a.angle
    s = math.sin(half)
    return Rotation((math.cos(half), a.axis[0] * s, a.axis[1] * s, a.axis[2] * s))


def Rx(angle: float) -> Rotation:
    return Rotation.about((1, 0, 0), angle)


def Ry(angle: float) -> Rotation:
    return Rotation.about((0, 1, 0), angle)


def Rz(angle: float) -> Rotation:
    return Rotation.about((0, 0, 1), angle)


IDENTITY = Rotation.identity()


def compose(a: Rotation, b: Rotation) -> Rotation:
    """Hamilton product ``a * b``: apply ``b`` first."""
    w1, x1, y1, z1 = a.q
    w2, x2, y2, z2 = b.q
    return Rotation((
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ))


def compose_all(*rs: Rotation) -> Rotation:
    """``compose_all(a, b, c) == a @ b @ c``."""
    out = IDENTITY
    for r in rs:
        out = compose(out, r)
    return out


def power(r: Rotation, k: int) -> Rotation:
    # scaling the angle avoids error build-up of repeated products
    k = int(k)
    if k == 0:
        return IDENTITY
    theta = r.angle()
    axis = r.axis()
    return from_axis_angle(AxisAngle(tuple(axis), k * theta)) if theta > 0 else IDENTITY


def distance(a: Rotation, b: Rotation) -> float:
    """Geodesic angle of ``a b^-1`` in [0, pi]."""
    return compose(a, b.inverse()).angle()


def is_identity(r: Rotation, tol: float = DEFAULT_TOL) -> bool:
    return r.angle() <= tol


def is_order_two(r: Rotation, tol: float = DEFAULT_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return distance(compose(r, r), IDENTITY) <= tol and distance(r, IDENTITY) > tol


def commutator(a: Rotation, b: Rotation) -> Rotation:
    """``a b a^-1 b^-1``."""
    return compose_all(a, b, a.inverse(), b.inverse())


def aligning_rotation(src_axis: Sequence[float], dst_axis: Sequence[float]) -> Rotation:
    """Shortest rotation taking the line through ``src_axis`` onto the line
    through ``dst_axis``.

    Both orientations of the source line are tried; if they are equally
    far (orthogonal lines) the lexicographically larger orientation wins.
    """
    src = np.asarray(src_axis, float)
    src = src / np.linalg.norm(src)
    dst = np.asarray(dst_axis, float)
    dst = dst / np.linalg.norm(dst)
    d = float(src @ dst)
    if d < -1e-12 or (abs(d) <= 1e-12 and tuple(-src) > tuple(src)):
        src = -src
        d = -d
    cross = np.cross(src, dst)
    n = float(np.linalg.norm(cross))
    if n < 1e-14:
        return IDENTITY
    return from_axis_angle(AxisAngle(tuple(cross), math.atan2(n, d)))


def orthogonal_vector(axis) -> np.ndarray:
    """A unit vector perpendicular to ``axis`` (deterministic choice)."""
    a = np.asarray(axis, float)
    a = a / np.linalg.norm(a)
    trial = np.array([0.0, 1.0, 0.0]) if abs(a[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    v = trial - (trial @ a) * a
    return v / np.linalg.norm(v)
