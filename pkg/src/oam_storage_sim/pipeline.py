"""Write -> store -> retrieve runner.

Spatial profile and Zeeman dynamics factorize: the retrieved transverse field
is fixed by the stored W' profile, and storage only rescales it by the
(complex) Zeeman read amplitude normalized to its value at t_s = 0.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .ensemble import DEFAULT_THETA_DEG, LambdaParams, CoherenceField, approx_coherence, g_r_peak_time, g_r_pulse
from .errors import InvalidInput, IoFailure, NumericalInvariantError
from .optics import CS_D2_WAVELENGTH_UM, ComplexField, Direction, GridSpec, ModeSpec, flip_frame, sample_superposition
from .zeeman import GroundDM, ReadProjection, RevivalRecord, ZeemanParams, revival_scan

__all__ = [
    "ExperimentConfig",
    "RevivalRecord",
    "Frame",
    "TimeSeries",
    "Manifest",
    "retrieve_field",
    "retrieved_time_series",
    "retrieve_at",
    "g_r_trace",
    "run_experiment",
]

DEFAULT_POPULATIONS = (0.0, 0.0, 0.0, 0.0, 0.05, 0.0, 0.95)


@dataclass(frozen=True)
class ExperimentConfig:
    modes: tuple[ModeSpec, ...]
    grid: GridSpec
    t_s: tuple[float, ...]
    lambda_params: LambdaParams = LambdaParams()
    zeeman_params: ZeemanParams = ZeemanParams()
    projection: ReadProjection = ReadProjection()
    populations: tuple[float, ...] = DEFAULT_POPULATIONS
    coherence_31: complex = 0.2j
    read_window: tuple[float, float] = (0.0, 2.0)
    frames: tuple[float, ...] | None = None
    theta_deg: float = DEFAULT_THETA_DEG
    wavelength_nm: float = CS_D2_WAVELENGTH_UM * 1000.0
    output_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "t_s", tuple(float(t) for t in self.t_s))
        object.__setattr__(self, "populations", tuple(float(p) for p in self.populations))
        object.__setattr__(self, "coherence_31", complex(self.coherence_31))
        object.__setattr__(self, "read_window", tuple(float(t) for t in self.read_window))
        if self.frames is not None:
            object.__setattr__(self, "frames", tuple(float(t) for t in self.frames))
        if not self.t_s:
            raise InvalidInput("t_s list is empty")
        if self.t_s[0] < 0 or any(b < a for a, b in zip(self.t_s, self.t_s[1:])):
            raise InvalidInput("t_s list must be sorted and non-negative")
        if self.frames is not None and any(t < 0 for t in self.frames):
            raise InvalidInput("frame times must be non-negative")
        if not self.wavelength_nm > 0:
            raise InvalidInput("wavelength must be > 0")
        lo, hi = self.read_window
        if not 0 <= lo <= hi:
            raise InvalidInput("read window must satisfy 0 <= start <= stop")

    @property
    def wavelength(self) -> float:
        """Optical wavelength in um."""
        return self.wavelength_nm / 1000.0

    @property
    def frame_times(self) -> tuple[float, ...]:
        return self.t_s if self.frames is None else self.frames

    def initial_state(self) -> GroundDM:
        return GroundDM.edge_pumped(self.populations, self.coherence_31)


@dataclass(frozen=True, eq=False)
class Frame:
    t_s: float
    field: ComplexField  # retrieved field at t_s, own frame
    amplitude: complex

    @property
    def image(self) -> np.ndarray:
        return self.field.intensity()


@dataclass(eq=False)
class TimeSeries:
    records: list[RevivalRecord]
    frames: list[Frame]
    stored_field: ComplexField
    read_time: float

    @property
    def stored_power(self) -> float:
        return self.stored_field.power()

    @property
    def reference_peak(self) -> float:
        """Peak pixel intensity at t_s = 0; fixed normalization for frames."""
        return float(self.stored_field.intensity().max())


@dataclass
class Manifest:
    config_digest: str
    files: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> str:
        doc = {"config_digest": self.config_digest, "files": [{"path": p, "sha256": d} for p, d in self.files]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def retrieve_field(coh: CoherenceField) -> ComplexField:
    """Field radiated by the stored coherence.

    The envelope is the coherence itself (already the conjugate of the W'
    profile); it travels along -k_W', so the result is tagged backward.
    Sampled in lab coordinates its winding is reversed; in its own frame the
    charge matches W'.
    """
    return ComplexField(coh.data, coh.pitch, coh.origin, Direction.BACKWARD)


def _weight_phase(modes: Sequence[ModeSpec]) -> complex:
    for m in modes:
        if m.weight != 0:
            return m.weight / abs(m.weight)
    return 1.0 + 0.0j


class _Retriever:
    """Shared state of one configuration: stored field and Zeeman reference."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        modes = [replace(m, wavelength=cfg.wavelength) for m in cfg.modes]
        wp = sample_superposition(modes, cfg.grid)
        if wp.direction is not Direction.FORWARD:
            raise InvalidInput("the written beam W' must propagate forward")
        self.read_time = g_r_peak_time(cfg.lambda_params, cfg.read_window)
        coh = approx_coherence(wp, cfg.lambda_params, self.read_time, 0.0, cfg.theta_deg, cfg.wavelength)
        self.stored = retrieve_field(coh)
        self.rho0 = cfg.initial_state()
        a0 = revival_scan(self.rho0, cfg.zeeman_params, cfg.projection, [0.0])[0].amplitude
        if a0 == 0:
            raise NumericalInvariantError("initial state has no readable Zeeman coherence")
        self.a0 = a0
        # complex photodetector amplitude at t_s = 0; |s0|^2 equals the stored power
        lp = cfg.lambda_params
        self.s0 = (
            lp.A
            * g_r_pulse(self.read_time, lp)
            * np.conj(_weight_phase(modes))
            * math.sqrt(wp.power())
        )

    def ratios(self, times: Sequence[float]) -> list[complex]:
        if not times:
            return []
        recs = revival_scan(self.rho0, self.cfg.zeeman_params, self.cfg.projection, times)
        return [r.amplitude / self.a0 for r in recs]

    def record(self, t: float, ratio: complex) -> RevivalRecord:
        amp = complex(ratio * self.s0)
        return RevivalRecord(t, amp, abs(amp) ** 2)

    def frame(self, t: float, ratio: complex) -> Frame:
        f = self.stored.with_data(ratio * self.stored.data)
        return Frame(t, flip_frame(f), complex(ratio * self.s0))


def retrieved_time_series(cfg: ExperimentConfig) -> TimeSeries:
    """Photodetector records for every t_s plus retrieved frames at the frame times."""
    r = _Retriever(cfg)
    records = [r.record(t, q) for t, q in zip(cfg.t_s, r.ratios(cfg.t_s))]
    ft = sorted(cfg.frame_times)
    frames = [r.frame(t, q) for t, q in zip(ft, r.ratios(ft))]
    return TimeSeries(records, frames, r.stored, r.read_time)


def retrieve_at(cfg: ExperimentConfig, t_s: float) -> tuple[RevivalRecord, Frame, float]:
    """Single retrieval at ``t_s``; also returns the t_s = 0 peak intensity."""
    if t_s < 0:
        raise InvalidInput("t_s must be >= 0")
    r = _Retriever(cfg)
    (q,) = r.ratios([t_s])
    return r.record(t_s, q), r.frame(t_s, q), float(r.stored.intensity().max())


def g_r_trace(p: LambdaParams, window: tuple[float, float], points: int = 401) -> tuple[np.ndarray, np.ndarray]:
    t = np.linspace(window[0], window[1], points)
    return t, g_r_pulse(t, p)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def frame_name(index: int, t_s: float) -> str:
    return f"frame_{index:03d}_t{t_s:09.4f}us.pgm"


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> Manifest:
    """Write the revival CSV, one PGM per frame time and a manifest.

    Same config -> byte-identical files. Frames share a fixed normalization
    (the t_s = 0 peak) so collapse frames come out dark.
    """
    from .io.config import config_digest
    from .io.writers import write_csv, write_pgm

    out = Path(out_dir if out_dir is not None else (cfg.output_dir or "."))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(out, exc.strerror or str(exc)) from exc

    digest = config_digest(cfg)
    series = retrieved_time_series(cfg)
    peak = series.reference_peak
    manifest = Manifest(digest)

    csv_path = out / "revival.csv"
    write_csv(series.records, csv_path)
    manifest.files.append((csv_path.name, _digest(csv_path)))
    for i, fr in enumerate(series.frames):
        p = out / frame_name(i, fr.t_s)
        write_pgm(fr.image, p, normalization=peak if peak > 0 else "global_peak", digest=digest)
        manifest.files.append((p.name, _digest(p)))

    mpath = out / "manifest.json"
    try:
        mpath.write_text(manifest.to_json(), encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(mpath, exc.strerror or str(exc)) from exc
    return manifest
