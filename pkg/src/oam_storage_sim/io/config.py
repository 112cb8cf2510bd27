"""Flat ``section.key = value`` config documents.

Example::

    # one charge-1 mode plus a Gaussian reference
    modes[0].charge = 1
    modes[0].waist_um = 100
    modes[1].charge = 0
    modes[1].waist_um = 100
    grid.width = 128
    grid.height = 128
    grid.pitch_um = 5
    zeeman.B_gauss = 0.6
    scan.t_start_us = 0
    scan.t_stop_us = 20
    scan.t_step_us = 0.02

Values are integers, reals, complex numbers written ``a+bi``, bare strings
or bracketed lists ``[a, b, ...]``. Units are part of the key name.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from ..ensemble import CS_D2_GAMMA, DEFAULT_GAMMA, DEFAULT_OMEGA_R, DEFAULT_THETA_DEG, LambdaParams
from ..errors import ConfigError, InvalidInput, ParseError
from ..optics import Direction, GridSpec, ModeSpec
from ..pipeline import DEFAULT_POPULATIONS, ExperimentConfig
from ..zeeman import CG_READ_WEIGHTS, ReadProjection, ZeemanParams

_MODE_KEY = re.compile(r"^modes\[(\d+)\]\.(\w+)$")


class _ValueError(Exception):
    pass


def _parse_int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise _ValueError(f"expected an integer, got {s!r}") from None


def _parse_real(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise _ValueError(f"expected a real number, got {s!r}") from None
    if not math.isfinite(v):
        raise _ValueError("value must be finite")
    return v


def _parse_complex(s: str) -> complex:
    t = s.replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    if "i" in t or t.count("j") > 1:
        raise _ValueError(f"expected a complex number a+bi, got {s!r}")
    try:
        v = complex(t)
    except ValueError:
        raise _ValueError(f"expected a complex number a+bi, got {s!r}") from None
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise _ValueError("value must be finite")
    return v


def _parse_string(s: str) -> str:
    if len(s) >= 2 and s[0] == s[-1] == '"':
        return s[1:-1]
    return s


def _list_of(item: Callable[[str], Any], length: int | None = None):
    def parse(s: str):
        if not (s.startswith("[") and s.endswith("]")):
            raise _ValueError(f"expected a list [a, b, ...], got {s!r}")
        body = s[1:-1].strip()
        items = [item(p.strip()) for p in body.split(",")] if body else []
        if length is not None and len(items) != length:
            raise _ValueError(f"expected {length} items, got {len(items)}")
        return tuple(items)

    return parse


@dataclass(frozen=True)
class _Key:
    parse: Callable[[str], Any]
    default: Any = None
    required: bool = False


MODE_KEYS = {
    "charge": _Key(_parse_int, required=True),
    "waist_um": _Key(_parse_real, required=True),
    "z_um": _Key(_parse_real, 0.0),
    "weight": _Key(_parse_complex, 1 + 0j),
    "center_um": _Key(_list_of(_parse_real, 2), (0.0, 0.0)),
    "direction": _Key(_parse_string, "forward"),
}

KEYS = {
    "grid.width": _Key(_parse_int, required=True),
    "grid.height": _Key(_parse_int, required=True),
    "grid.pitch_um": _Key(_parse_real, required=True),
    "grid.origin_um": _Key(_list_of(_parse_real, 2)),
    "optics.wavelength_nm": _Key(_parse_real, 852.3),
    "optics.theta_deg": _Key(_parse_real, DEFAULT_THETA_DEG),
    "lambda.Gamma22_per_us": _Key(_parse_real, CS_D2_GAMMA),
    "lambda.gamma_per_us": _Key(_parse_real, DEFAULT_GAMMA),
    "lambda.OmegaR_per_us": _Key(_parse_real, DEFAULT_OMEGA_R),
    "lambda.A": _Key(_parse_complex, 1 + 0j),
    "zeeman.B_gauss": _Key(_parse_real, required=True),
    "zeeman.gF": _Key(_parse_real, 0.25),
    "zeeman.axis": _Key(_list_of(_parse_real, 3), (1.0, 0.0, 0.0)),
    "zeeman.gamma_B_per_us": _Key(_parse_real),
    "zeeman.populations": _Key(_list_of(_parse_real, 7), DEFAULT_POPULATIONS),
    "zeeman.coherence_31": _Key(_parse_complex, 0.2j),
    "zeeman.read_weights": _Key(_list_of(_parse_complex, 5), CG_READ_WEIGHTS),
    "scan.t_us": _Key(_list_of(_parse_real)),
    "scan.t_start_us": _Key(_parse_real),
    "scan.t_stop_us": _Key(_parse_real),
    "scan.t_step_us": _Key(_parse_real),
    "scan.read_window_us": _Key(_list_of(_parse_real, 2), (0.0, 2.0)),
    "scan.frames_us": _Key(_list_of(_parse_real)),
    "output.dir": _Key(_parse_string),
}


def _scan_times(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(v) for v in np.round(start + step * np.arange(n), 12))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config document.

    Raises :class:`ConfigError` carrying every problem found, each naming its
    key.
    """
    errors: list[ParseError] = []
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    modes: dict[int, dict[str, Any]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append(ParseError(lineno, line, "expected 'key = value'"))
            continue
        key, _, value = (part.strip() for part in line.partition("="))
        if key in lines:
            errors.append(ParseError(lineno, key, f"duplicate key (first set on line {lines[key]})"))
            continue
        lines[key] = lineno
        mm = _MODE_KEY.match(key)
        if mm:
            spec = MODE_KEYS.get(mm.group(2))
        else:
            spec = KEYS.get(key)
        if spec is None:
            errors.append(ParseError(lineno, key, "unknown key"))
            continue
        try:
            parsed = spec.parse(value)
        except _ValueError as exc:
            errors.append(ParseError(lineno, key, str(exc)))
            continue
        if mm:
            modes.setdefault(int(mm.group(1)), {})[mm.group(2)] = parsed
        else:
            values[key] = parsed

    def get(key: str):
        return values.get(key, KEYS[key].default)

    def fail(key: str, reason: str):
        errors.append(ParseError(lines.get(key), key, reason))

    for key, spec in KEYS.items():
        if spec.required and key not in values and key not in lines:
            fail(key, "required key missing")

    # modes
    mode_specs: list[ModeSpec] = []
    if not modes:
        for name, spec in MODE_KEYS.items():
            if spec.required:
                fail(f"modes[0].{name}", "required key missing")
    expected = list(range(len(modes)))
    if sorted(modes) != expected:
        fail("modes", f"mode indices must be contiguous from 0, got {sorted(modes)}")
    wavelength_um = get("optics.wavelength_nm") / 1000.0
    for i in sorted(modes):
        fields = modes[i]
        missing = [n for n, s in MODE_KEYS.items() if s.required and n not in fields]
        for n in missing:
            fail(f"modes[{i}].{n}", "required key missing")
        if missing:
            continue
        get_m = lambda n: fields.get(n, MODE_KEYS[n].default)  # noqa: E731
        direction = get_m("direction")
        if direction not in ("forward", "backward"):
            fail(f"modes[{i}].direction", "direction must be forward or backward")
            continue
        try:
            mode_specs.append(
                ModeSpec(
                    charge=fields["charge"],
                    waist=fields["waist_um"],
                    z=get_m("z_um"),
                    weight=get_m("weight"),
                    center=get_m("center_um"),
                    direction=Direction(direction),
                    wavelength=wavelength_um,
                )
            )
        except InvalidInput as exc:
            fail(f"modes[{i}]", str(exc))

    def build(key: str, factory):
        try:
            return factory()
        except InvalidInput as exc:
            fail(key, str(exc))
        except (TypeError, KeyError):
            return None  # a required key is missing; already reported
        return None

    grid = None
    pitch_ok = values.get("grid.pitch_um", 1.0) > 0
    if not pitch_ok:
        fail("grid.pitch_um", "pitch must be > 0")
    for k in ("grid.width", "grid.height"):
        if values.get(k, 2) < 2:
            fail(k, "grid needs at least 2 pixels per side")
    if pitch_ok and all(k in values for k in ("grid.width", "grid.height", "grid.pitch_um")):
        if min(values["grid.width"], values["grid.height"]) >= 2:
            grid = build(
                "grid.width",
                lambda: GridSpec(values["grid.width"], values["grid.height"], values["grid.pitch_um"], get("grid.origin_um")),
            )

    if get("optics.wavelength_nm") <= 0:
        fail("optics.wavelength_nm", "wavelength must be > 0")
    if get("optics.theta_deg") <= 0:
        fail("optics.theta_deg", "theta must be > 0")

    lam = build(
        "lambda",
        lambda: LambdaParams(
            get("lambda.Gamma22_per_us"), get("lambda.gamma_per_us"), get("lambda.OmegaR_per_us"), get("lambda.A")
        ),
    )

    zee = None
    if "zeeman.B_gauss" in values:
        B = values["zeeman.B_gauss"]
        gamma_B = get("zeeman.gamma_B_per_us")
        if gamma_B is None:
            # field-on storage lasts four times longer; with no field the plain decay applies
            base = get("lambda.gamma_per_us")
            gamma_B = base / 4 if B > 0 else base
        axis = np.asarray(get("zeeman.axis"), float)
        norm = np.linalg.norm(axis)
        if norm > 0 and abs(norm - 1) > 1e-12:
            axis = axis / norm
        zee = build("zeeman.B_gauss", lambda: ZeemanParams(B, get("zeeman.gF"), tuple(axis), gamma_B))
    proj = build("zeeman.read_weights", lambda: ReadProjection(get("zeeman.read_weights")))

    # scan
    times = None
    ranged = [k for k in ("scan.t_start_us", "scan.t_stop_us", "scan.t_step_us") if k in values]
    if "scan.t_us" in values and ranged:
        fail("scan.t_us", "give either scan.t_us or scan.t_start_us/t_stop_us/t_step_us, not both")
    elif "scan.t_us" in values:
        times = values["scan.t_us"]
    elif len(ranged) == 3:
        start, stop, step = (values[k] for k in ("scan.t_start_us", "scan.t_stop_us", "scan.t_step_us"))
        if step <= 0 or stop < start:
            fail("scan.t_step_us", "need t_step_us > 0 and t_stop_us >= t_start_us")
        else:
            times = _scan_times(start, stop, step)
    elif ranged:
        for k in ("scan.t_start_us", "scan.t_stop_us", "scan.t_step_us"):
            if k not in values:
                fail(k, "required with the other scan range keys")
    else:
        fail("scan.t_us", "required key missing (or scan.t_start_us/t_stop_us/t_step_us)")
    if times is not None:
        if not times:
            fail("scan.t_us", "time list is empty")
        elif times[0] < 0 or any(b < a for a, b in zip(times, times[1:])):
            fail("scan.t_us", "times must be sorted and non-negative")
    frames = get("scan.frames_us")
    if frames is not None and any(t < 0 for t in frames):
        fail("scan.frames_us", "frame times must be non-negative")
    window = get("scan.read_window_us")
    if not 0 <= window[0] <= window[1]:
        fail("scan.read_window_us", "read window must satisfy 0 <= start <= stop")
    pops = get("zeeman.populations")

    if errors:
        raise ConfigError(errors)

    try:
        cfg = ExperimentConfig(
            modes=tuple(mode_specs),
            grid=grid,
            t_s=times,
            lambda_params=lam,
            zeeman_params=zee,
            projection=proj,
            populations=pops,
            coherence_31=get("zeeman.coherence_31"),
            read_window=window,
            frames=frames,
            theta_deg=get("optics.theta_deg"),
            wavelength_nm=get("optics.wavelength_nm"),
            output_dir=get("output.dir"),
        )
        cfg.initial_state()
    except (InvalidInput, ArithmeticError) as exc:
        raise ConfigError([ParseError(None, "zeeman.populations", str(exc))]) from exc
    return cfg


def load_config(path) -> ExperimentConfig:
    from ..errors import IoFailure

    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from exc
    return parse_config(text)


def _real(x: float) -> str:
    return repr(float(x))


def _complex(z: complex) -> str:
    z = complex(z)
    im = repr(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{z.real!r}{im}i"


def _list(items, fmt) -> str:
    return "[" + ", ".join(fmt(v) for v in items) + "]"


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical text of ``cfg``; ``parse_config(dump_config(c)) == c``."""
    out = []
    for i, m in enumerate(cfg.modes):
        out += [
            f"modes[{i}].charge = {m.charge}",
            f"modes[{i}].waist_um = {_real(m.waist)}",
            f"modes[{i}].z_um = {_real(m.z)}",
            f"modes[{i}].weight = {_complex(m.weight)}",
            f"modes[{i}].center_um = {_list(m.center, _real)}",
            f"modes[{i}].direction = {m.direction.value}",
        ]
    g = cfg.grid
    lp, zp = cfg.lambda_params, cfg.zeeman_params
    out += [
        f"grid.width = {g.width}",
        f"grid.height = {g.height}",
        f"grid.pitch_um = {_real(g.pitch)}",
        f"grid.origin_um = {_list(g.origin, _real)}",
        f"optics.wavelength_nm = {_real(cfg.wavelength_nm)}",
        f"optics.theta_deg = {_real(cfg.theta_deg)}",
        f"lambda.Gamma22_per_us = {_real(lp.Gamma22)}",
        f"lambda.gamma_per_us = {_real(lp.gamma)}",
        f"lambda.OmegaR_per_us = {_real(lp.OmegaR)}",
        f"lambda.A = {_complex(lp.A)}",
        f"zeeman.B_gauss = {_real(zp.B)}",
        f"zeeman.gF = {_real(zp.gF)}",
        f"zeeman.axis = {_list(zp.axis, _real)}",
        f"zeeman.gamma_B_per_us = {_real(zp.gamma_B)}",
        f"zeeman.populations = {_list(cfg.populations, _real)}",
        f"zeeman.coherence_31 = {_complex(cfg.coherence_31)}",
        f"zeeman.read_weights = {_list(cfg.projection.weights, _complex)}",
        f"scan.t_us = {_list(cfg.t_s, _real)}",
        f"scan.read_window_us = {_list(cfg.read_window, _real)}",
    ]
    if cfg.frames is not None:
        out.append(f"scan.frames_us = {_list(cfg.frames, _real)}")
    if cfg.output_dir is not None:
        out.append(f"output.dir = {cfg.output_dir}")
    return "\n".join(out) + "\n"


def config_digest(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode("utf-8")).hexdigest()[:16]
