"""Ground-manifold (F = 3) spin dynamics in a transverse magnetic field.

Density matrices are indexed by ``m = -F ... +F`` in ascending order, so
``rho[m + F, n + F]`` is the element ``<m|rho|n>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ensemble import DEFAULT_GAMMA
from .errors import EmptyGrid, InvalidF, InvalidInput, NumericalInvariantError

F_GROUND = 3
DIM = 2 * F_GROUND + 1

BOHR_MHZ_PER_GAUSS = 1.399624  # mu_B / h
CS_GF_F3 = 0.25

# Two-photon read couplings of the pair (m, m-2) through F'=2:
# <3 m; 1 -1 | 2 m-1> <3 m-2; 1 +1 | 2 m-1>, for m = -1 ... 3.
CG_READ_WEIGHTS = (
    math.sqrt(15) / 21,
    math.sqrt(30) / 21,
    2 / 7,
    math.sqrt(30) / 21,
    math.sqrt(15) / 21,
)
READ_M = (-1, 0, 1, 2, 3)


def angular_momentum_ops(F) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-F matrices (Fx, Fy, Fz) in the ascending-m basis.

    ``F`` may be an integer or a half-integer (float or Fraction).
    """
    two_f = Fraction(F) * 2
    if two_f.denominator != 1 or two_f < 1:
        raise InvalidF(f"F must be a positive integer or half-integer, got {F!r}")
    f = float(Fraction(F))
    m = np.arange(-f, f + 1.0)
    raising = np.diag(np.sqrt(f * (f + 1) - m[:-1] * (m[:-1] + 1)), k=-1).astype(complex)
    lowering = raising.conj().T
    fx = (raising + lowering) / 2
    fy = (raising - lowering) / 2j
    fz = np.diag(m).astype(complex)
    return fx, fy, fz


_FX, _FY, _FZ = angular_momentum_ops(F_GROUND)


@dataclass(frozen=True)
class ZeemanParams:
    B: float = 0.6
    gF: float = CS_GF_F3
    axis: tuple[float, float, float] = (1.0, 0.0, 0.0)
    gamma_B: float = DEFAULT_GAMMA / 4

    def __post_init__(self):
        if not (self.B >= 0 and math.isfinite(self.B)):
            raise InvalidInput("B must be >= 0")
        if not self.gamma_B >= 0:
            raise InvalidInput("gamma_B must be >= 0")
        axis = tuple(float(a) for a in self.axis)
        if len(axis) != 3 or abs(math.sqrt(sum(a * a for a in axis)) - 1.0) > 1e-9:
            raise InvalidInput(f"axis must be a unit 3-vector, got {self.axis!r}")
        object.__setattr__(self, "axis", axis)

    def generator(self) -> np.ndarray:
        nx, ny, nz = self.axis
        return nx * _FX + ny * _FY + nz * _FZ


@dataclass(frozen=True, eq=False)
class GroundDM:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (DIM, DIM):
            raise InvalidInput(f"density matrix must be {DIM}x{DIM}")
        if np.linalg.norm(rho - rho.conj().T) >= 1e-12:
            raise NumericalInvariantError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr.imag) > 1e-12 or not (0 < tr.real <= 1 + 1e-12):
            raise NumericalInvariantError(f"trace {tr} outside (0, 1]")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise NumericalInvariantError("density matrix is not positive semidefinite")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    def element(self, m: int, n: int) -> complex:
        return complex(self.rho[m + F_GROUND, n + F_GROUND])

    @classmethod
    def edge_pumped(cls, populations: Sequence[float] | None = None, coherence_31: complex = 0.2j) -> "GroundDM":
        """Atoms pumped to the top of the manifold plus one written (3, 1) coherence.

        ``populations`` lists p_m for m = -3 ... +3 (default 0.95 in m=3,
        0.05 in m=1).
        """
        if populations is None:
            populations = (0, 0, 0, 0, 0.05, 0, 0.95)
        if len(populations) != DIM:
            raise InvalidInput(f"need {DIM} populations")
        rho = np.diag(np.asarray(populations, dtype=float)).astype(complex)
        rho[3 + F_GROUND, 1 + F_GROUND] = coherence_31
        rho[1 + F_GROUND, 3 + F_GROUND] = np.conj(coherence_31)
        return cls(rho)


@dataclass(frozen=True)
class ReadProjection:
    """Complex weights w_m of the read-out pairs (m, m-2), m = -1 ... 3."""

    weights: tuple[complex, ...] = CG_READ_WEIGHTS

    def __post_init__(self):
        w = tuple(complex(x) for x in self.weights)
        if len(w) != len(READ_M):
            raise InvalidInput(f"need {len(READ_M)} read weights (m = -1..3)")
        if not any(w):
            raise InvalidInput("at least one read weight must be nonzero")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class RevivalRecord:
    t_s: float
    amplitude: complex
    intensity: float


def larmor(params: ZeemanParams) -> tuple[float, float]:
    """Larmor angular frequency (rad/us) and period (us; ``inf`` at B = 0)."""
    omega = 2.0 * math.pi * params.gF * BOHR_MHZ_PER_GAUSS * params.B
    period = math.inf if omega == 0 else 2.0 * math.pi / abs(omega)
    return omega, period


def _propagator(params: ZeemanParams, t_s: float) -> np.ndarray:
    omega, _ = larmor(params)
    evals, vecs = np.linalg.eigh(params.generator())
    return (vecs * np.exp(-1j * omega * t_s * evals)) @ vecs.conj().T


def rotate(matrix: np.ndarray, params: ZeemanParams, t_s: float) -> np.ndarray:
    """``U M U^dagger`` for any 7x7 operator, U = exp(-i Omega_L (F . n) t_s)."""
    if t_s < 0:
        raise InvalidInput("t_s must be >= 0")
    u = _propagator(params, t_s)
    return u @ np.asarray(matrix, complex) @ u.conj().T


def precess(rho: GroundDM, params: ZeemanParams, t_s: float) -> GroundDM:
    if t_s < 0:
        raise InvalidInput("t_s must be >= 0")
    if larmor(params)[0] * t_s == 0:
        return rho  # zero rotation angle: exactly the identity
    out = rotate(rho.rho, params, t_s)
    # trace and Hermiticity are exact in theory; strip rounding before validation
    out = (out + out.conj().T) / 2
    return GroundDM(out)


def grating_part(rho) -> np.ndarray:
    """Off-diagonal (written) coherences of ``rho``.

    Only these carry the spatial phase of the stored grating and so radiate
    into the phase-matched retrieved mode; precessed populations give
    spatially uniform coherences that do not.
    """
    m = np.array(rho.rho if isinstance(rho, GroundDM) else rho, dtype=complex)
    return m - np.diag(np.diag(m))


def retrieval_amplitude(rho, proj: ReadProjection, gamma: float, t_s: float) -> complex:
    """``exp(-gamma t_s) * sum_m w_m rho[m, m-2]``; linear in ``rho``."""
    m = rho.rho if isinstance(rho, GroundDM) else np.asarray(rho)
    total = 0j
    for w, mm in zip(proj.weights, READ_M):
        total += w * m[mm + F_GROUND, mm - 2 + F_GROUND]
    return complex(math.exp(-gamma * t_s) * total)


def revival_scan(
    rho0: GroundDM, params: ZeemanParams, proj: ReadProjection, t_grid: Sequence[float]
) -> list[RevivalRecord]:
    """Retrieved amplitude versus storage time for a precessing stored grating."""
    t_grid = [float(t) for t in t_grid]
    if not t_grid:
        raise EmptyGrid("t_grid is empty")
    if t_grid[0] < 0 or any(b < a for a, b in zip(t_grid, t_grid[1:])):
        raise InvalidInput("t_grid must be sorted and non-negative")
    grating = grating_part(rho0)
    omega, _ = larmor(params)
    evals, vecs = np.linalg.eigh(params.generator())
    g_eig = vecs.conj().T @ grating @ vecs
    records = []
    for t in t_grid:
        phase = np.exp(-1j * omega * t * evals)
        rotated = vecs @ (phase[:, None] * g_eig * phase.conj()[None, :]) @ vecs.conj().T
        a = retrieval_amplitude(rotated, proj, params.gamma_B, t)
        records.append(RevivalRecord(t, a, abs(a) ** 2))
    return records
