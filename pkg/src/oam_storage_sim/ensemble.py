"""Lambda-system coherence written by W and W' and read out by R.

Rates are in 1/us, times in us. Rabi-frequency fields may carry any common
unit since only their ratios enter the written coherence.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InvalidInput, NegativeTime
from .optics import CS_D2_WAVELENGTH_UM, ComplexField

CS_D2_GAMMA = 2.0 * math.pi * 5.2
DEFAULT_GAMMA = 1.0 / 3.0
DEFAULT_OMEGA_R = 2.0
DEFAULT_THETA_DEG = 3.0

# |gamma2 * t| below this uses the series of sinh(x)/x
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class LambdaParams:
    Gamma22: float = CS_D2_GAMMA
    gamma: float = DEFAULT_GAMMA
    OmegaR: float = DEFAULT_OMEGA_R
    A: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not self.Gamma22 > 0:
            raise InvalidInput("Gamma22 must be > 0")
        if not self.gamma >= 0:
            raise InvalidInput("gamma must be >= 0")
        if not self.OmegaR >= 0:
            raise InvalidInput("OmegaR must be >= 0")
        object.__setattr__(self, "A", complex(self.A))

    @property
    def gamma1(self) -> float:
        return self.Gamma22 / 2 + self.gamma

    @property
    def gamma2_squared(self) -> float:
        return ((self.Gamma22 / 2 - self.gamma) ** 2 - 4 * self.OmegaR**2) / 4

    @property
    def gamma2(self) -> complex:
        """Purely imaginary in the oscillatory (strong-read) regime."""
        return cmath.sqrt(self.gamma2_squared)


@dataclass(frozen=True, eq=False)
class BeamTriple:
    W: ComplexField
    Wp: ComplexField
    R_scale: complex = 1.0 + 0.0j
    theta_deg: float = DEFAULT_THETA_DEG
    wavelength: float = CS_D2_WAVELENGTH_UM

    def __post_init__(self):
        if not self.W.same_grid(self.Wp):
            raise GridMismatch("W and W' must be sampled on the same grid")
        if not self.theta_deg > 0:
            raise InvalidInput("theta must be > 0")


@dataclass(frozen=True, eq=False)
class CoherenceField:
    """Slowly varying optical coherence sigma_{2,1a} over the transverse grid.

    The longitudinal carrier ``exp(-i k_W' . r)`` is not sampled; it is implied
    by the writing geometry and becomes the backward direction tag on
    retrieval.
    """

    data: np.ndarray
    t: float
    t_s: float
    grating_k: float
    pitch: float
    origin: tuple[float, float]

    def power(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2) * self.pitch**2)


def grating_wavenumber(theta_deg: float, wavelength: float = CS_D2_WAVELENGTH_UM) -> float:
    """|k_W - k_W'| for two beams of equal wavelength crossing at ``theta_deg``."""
    return 4.0 * math.pi / wavelength * math.sin(math.radians(theta_deg) / 2)


def _check_times(*times):
    for t in times:
        if np.any(np.asarray(t) < 0):
            raise NegativeTime(f"times must be >= 0, got {t!r}")


def g_r_pulse(t, p: LambdaParams):
    """Retrieved pulse shape ``exp(-gamma1 t) sinh(gamma2 t) / gamma2``.

    Works on scalars or arrays. Complex arithmetic covers both regimes (for
    imaginary gamma2 the ratio is ``sin(|gamma2| t) / |gamma2|``); near the
    critical point the power series of ``sinh(x)/x`` is used instead.
    """
    _check_times(t)
    tt = np.asarray(t, dtype=float)
    g1, g2 = p.gamma1, p.gamma2
    x = g2 * tt
    # Re(gamma2) < gamma1, so both exponents decay and nothing overflows
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = (np.exp((g2 - g1) * tt) - np.exp(-(g2 + g1) * tt)) / (2 * g2) if g2 != 0 else np.zeros_like(x)
    x2 = (g2 * g2) * tt * tt
    series = np.exp(-g1 * tt) * tt * (1 + x2 / 6 + x2 * x2 / 120 + x2 * x2 * x2 / 5040)
    out = np.real(np.where(np.abs(x) < _SERIES_CUTOFF, series, direct))
    return float(out) if out.ndim == 0 else out


def g_r_peak_time(p: LambdaParams, window: tuple[float, float] = (0.0, 2.0)) -> float:
    """Time of the maximum of g_R inside ``window`` (analytic stationary point)."""
    lo, hi = window
    _check_times(lo, hi)
    if hi < lo:
        raise InvalidInput("read window must satisfy start <= stop")
    s2 = p.gamma2_squared
    g1 = p.gamma1
    if s2 > 0:
        s = math.sqrt(s2)
        t_star = math.atanh(s / g1) / s
    elif s2 < 0:
        s = math.sqrt(-s2)
        t_star = math.atan2(s, g1) / s
    else:
        t_star = 1.0 / g1
    candidates = [lo, hi] + ([t_star] if lo <= t_star <= hi else [])
    return max(candidates, key=lambda t: g_r_pulse(t, p))


def write_coherence(b: BeamTriple, p: LambdaParams, t: float, t_s: float) -> CoherenceField:
    """Full written coherence ``g_R e^{-gamma t_s} R W conj(W') / (|W|^2 + |W'|^2)``.

    Pixels where both writing fields vanish hold no driven atoms and are set
    to zero.
    """
    _check_times(t, t_s)
    W, Wp = b.W.data, b.Wp.data
    denom = np.abs(W) ** 2 + np.abs(Wp) ** 2
    ratio = np.zeros_like(W)
    lit = denom > 0
    ratio[lit] = W[lit] * np.conj(Wp[lit]) / denom[lit]
    scale = g_r_pulse(t, p) * math.exp(-p.gamma * t_s) * b.R_scale
    return CoherenceField(
        scale * ratio,
        float(t),
        float(t_s),
        grating_wavenumber(b.theta_deg, b.wavelength),
        b.Wp.pitch,
        b.Wp.origin,
    )


def approx_coherence(
    Wp: ComplexField,
    p: LambdaParams,
    t: float,
    t_s: float,
    theta_deg: float = DEFAULT_THETA_DEG,
    wavelength: float = CS_D2_WAVELENGTH_UM,
) -> CoherenceField:
    """Strong plane-wave pump limit: ``A g_R e^{-gamma t_s} conj(E_W')``."""
    _check_times(t, t_s)
    scale = p.A * g_r_pulse(t, p) * math.exp(-p.gamma * t_s)
    return CoherenceField(
        scale * np.conj(Wp.data),
        float(t),
        float(t_s),
        grating_wavenumber(theta_deg, wavelength),
        Wp.pitch,
        Wp.origin,
    )
