"""Two-qubit quantum predictions in the Stokes picture.

States are 4x4 density matrices on the H/V (x) H/V product basis with
|H> = (1, 0), |V> = (0, 1).  The Pauli operator measuring along a Stokes
direction n is sigma(n) = n1*sz + n2*sx + n3*sy, so that (S1, S2, S3)
eigenbases are (H/V, +-45 deg, circular) respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sphere import UnitVector

__all__ = [
    "TwoQubitState",
    "CorrelationTensor",
    "outcome_probability",
    "correlation",
    "singlet",
    "werner",
    "colored_noise",
    "bell_diagonal",
    "maximally_mixed",
    "singlet_L",
    "parse_state",
]

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)
# Stokes-ordered Pauli vector: S1 = H/V, S2 = +-45, S3 = circular
_STOKES_PAULIS = (_SZ, _SX, _SY)

_HERMITICITY_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIGENVALUE_FLOOR = -1e-10


def _pauli_dot(v: UnitVector) -> np.ndarray:
    return v.x * _SZ + v.y * _SX + v.z * _SY


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Validated two-qubit density matrix (Hermitian, unit trace, positive).

    ``eigenvalue_floor`` is the allowed positivity slack.  It is strict by
    default; bell_diagonal loosens it for tensors reconstructed from
    measured visibilities, which can sit marginally outside the physical
    set while still giving valid probabilities for every product
    measurement.
    """

    rho: np.ndarray
    eigenvalue_floor: float = _EIGENVALUE_FLOOR

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > _HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > _TRACE_TOL or abs(np.trace(rho).imag) > _TRACE_TOL:
            raise ValueError(f"trace must be 1, got {np.trace(rho)}")
        if np.linalg.eigvalsh(rho).min() < self.eigenvalue_floor:
            raise ValueError("density matrix has a negative eigenvalue")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    # convenience: a state is usable directly as a correlation source
    def correlation(self, a: UnitVector, b: UnitVector) -> float:
        return correlation(self, a, b)


@dataclass(frozen=True, slots=True)
class CorrelationTensor:
    """Diagonal correlation tensor (t1, t2, t3) in the Stokes basis."""

    t1: float
    t2: float
    t3: float

    def __post_init__(self) -> None:
        for t in (self.t1, self.t2, self.t3):
            if abs(t) > 1.0 + 1e-12:
                raise ValueError(f"correlation tensor entry out of [-1, 1]: {t}")

    @classmethod
    def from_state(cls, state: TwoQubitState) -> "CorrelationTensor":
        vals = [
            float(np.trace(state.rho @ np.kron(s, s)).real) for s in _STOKES_PAULIS
        ]
        return cls(*vals)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t1, self.t2, self.t3)


def outcome_probability(
    state: TwoQubitState, a: UnitVector, b: UnitVector, r_a: int, r_b: int
) -> float:
    """P(r_a, r_b | a, b) = Tr[rho (Pi_a^{r_a} (x) Pi_b^{r_b})], clamped to [0, 1]."""
    if r_a not in (1, -1) or r_b not in (1, -1):
        raise ValueError(f"outcomes must be +1 or -1, got ({r_a}, {r_b})")
    proj_a = 0.5 * (_ID2 + r_a * _pauli_dot(a))
    proj_b = 0.5 * (_ID2 + r_b * _pauli_dot(b))
    p = float(np.trace(state.rho @ np.kron(proj_a, proj_b)).real)
    if p < -1e-12 or p > 1.0 + 1e-12:
        raise ValueError(f"probability {p} outside [0, 1] beyond tolerance")
    return min(1.0, max(0.0, p))


def correlation(state: TwoQubitState, a: UnitVector, b: UnitVector) -> float:
    """C(a, b) = <sigma(a) (x) sigma(b)> = sum of r_a*r_b-weighted outcome
    probabilities."""
    c = float(np.trace(state.rho @ np.kron(_pauli_dot(a), _pauli_dot(b))).real)
    if abs(c) > 1.0 + 1e-12:
        raise ValueError(f"correlation {c} outside [-1, 1] beyond tolerance")
    return min(1.0, max(-1.0, c))


_SINGLET_KET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)
_SINGLET_RHO = np.outer(_SINGLET_KET, _SINGLET_KET.conj())
# H/V-correlated product noise: (|HV><HV| + |VH><VH|) / 2
_HV_NOISE = np.diag([0, 0.5, 0.5, 0]).astype(complex)


def singlet() -> TwoQubitState:
    """The pure singlet state |psi-> = (|HV> - |VH>)/sqrt(2)."""
    return TwoQubitState(_SINGLET_RHO)


def maximally_mixed() -> TwoQubitState:
    return TwoQubitState(np.eye(4, dtype=complex) / 4.0)


def werner(v: float) -> TwoQubitState:
    """Singlet mixed with white noise: v*singlet + (1-v)*I/4."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {v}")
    return TwoQubitState(v * _SINGLET_RHO + (1.0 - v) * np.eye(4, dtype=complex) / 4.0)


def colored_noise(v: float) -> TwoQubitState:
    """Singlet mixed with H/V-correlated product noise.

    The noise term (|HV><HV| + |VH><VH|)/2 keeps the H/V-basis correlation
    perfect while degrading the two conjugate bases, so the Stokes correlation
    tensor is (-1, -v, -v).
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {v}")
    return TwoQubitState(v * _SINGLET_RHO + (1.0 - v) * _HV_NOISE)


# Visibility triples reconstructed from counting data can overshoot the
# Bell-diagonal positivity set by a few parts in 1e-3 (correlated estimation
# errors); product-measurement probabilities remain valid as long as every
# |t_i| <= 1, so tensors this close to the boundary are accepted.
_VISIBILITY_SLACK = 5e-3


def bell_diagonal(t1: float, t2: float, t3: float) -> TwoQubitState:
    """State with correlation tensor diag(t1, t2, t3) in the Stokes basis and
    maximally mixed marginals.

    Tensors outside the positivity set by more than the visibility-
    reconstruction slack are rejected, as is any |t_i| > 1.
    """
    for t in (t1, t2, t3):
        if abs(t) > 1.0 + 1e-12:
            raise ValueError(f"tensor entry {t} outside [-1, 1]")
    rho = np.eye(4, dtype=complex)
    for t, s in zip((t1, t2, t3), _STOKES_PAULIS):
        rho = rho + t * np.kron(s, s)
    rho /= 4.0
    floor = _EIGENVALUE_FLOOR
    if np.linalg.eigvalsh(rho).min() < _EIGENVALUE_FLOOR:
        floor = -_VISIBILITY_SLACK
    return TwoQubitState(rho, eigenvalue_floor=floor)


def singlet_L(phi: float) -> float:
    """Closed-form singlet prediction for the correlation sum: 2(1 + cos phi)."""
    return 2.0 * (1.0 + math.cos(phi))


def parse_state(spec: str) -> TwoQubitState:
    """Build a state from a compact text spec.

    Accepted forms: ``singlet``, ``mixed``, ``werner:V``, ``colored:V``,
    ``bell_diagonal:t1,t2,t3`` and ``visibilities:v1,v2,v3`` (shorthand for
    bell_diagonal(-v1, -v2, -v3)).
    """
    name, _, arg = spec.strip().partition(":")
    name = name.strip().lower()
    try:
        if name in ("singlet", "mixed", "maximally_mixed"):
            if arg:
                raise ValueError(f"{name} takes no parameters")
            return singlet() if name == "singlet" else maximally_mixed()
        if name == "werner":
            return werner(float(arg))
        if name in ("colored", "colored_noise"):
            return colored_noise(float(arg))
        if name == "bell_diagonal":
            t1, t2, t3 = (float(s) for s in arg.split(","))
            return bell_diagonal(t1, t2, t3)
        if name == "visibilities":
            v1, v2, v3 = (float(s) for s in arg.split(","))
            return bell_diagonal(-v1, -v2, -v3)
    except ValueError as exc:
        raise ValueError(f"invalid state spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown state spec {spec!r}")
