"""Quick invariant checks behind ``oam-storage-sim selftest``."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import ensemble, optics, zeeman


def _orthonormality():
    w0 = 100.0
    grid = optics.GridSpec(256, 256, 6 * w0 / 256)
    fields = {m: optics.sample_superposition([optics.ModeSpec(m, w0)], grid) for m in range(-3, 4)}
    cross = max(abs(optics.overlap(fields[a], fields[b])) for a in fields for b in fields if a != b)
    norm = max(abs(1 - optics.overlap(f, f)) for f in fields.values())
    return cross < 1e-6 and norm < 1e-3, f"max cross overlap {cross:.2e}, max norm error {norm:.2e}"


def _charges():
    w0 = 100.0
    grid = optics.GridSpec(128, 128, 4 * w0 / 128 * 1.5)
    got = []
    for m in range(-3, 4):
        f = optics.sample_superposition([optics.ModeSpec(m, w0)], grid)
        got.append((m, optics.measure_charge(f, w0), optics.measure_charge(optics.conjugate(f), w0)))
    ok = all(a == b == -c for a, b, c in got)
    return ok, "measured " + ", ".join(f"{b:+d}" for _, b, _ in got)


def _mirror_involution():
    specs = [optics.ModeSpec(1, 100.0, center=(10.0, -5.0)), optics.ModeSpec(0, 80.0, z=500.0)]
    twice = optics.transform_mode(optics.transform_mode(specs, "mirror"), "mirror")
    return twice == specs, "mirror(mirror(S)) == S"


def _pulse_continuity():
    p = ensemble.LambdaParams()
    crit = abs(p.Gamma22 / 2 - p.gamma) / 2
    t = np.linspace(0, 2, 401)
    lo = ensemble.g_r_pulse(t, ensemble.LambdaParams(OmegaR=crit - 5e-7))
    hi = ensemble.g_r_pulse(t, ensemble.LambdaParams(OmegaR=crit + 5e-7))
    d = float(np.max(np.abs(lo - hi)))
    return d < 1e-9, f"max jump across critical damping {d:.2e}"


def _precession():
    params = zeeman.ZeemanParams()
    _, period = zeeman.larmor(params)
    rho = zeeman.GroundDM.edge_pumped()
    worst = max(float(np.max(np.abs(zeeman.precess(rho, params, n * period).rho - rho.rho))) for n in range(1, 5))
    return worst < 1e-10, f"max deviation after n full periods {worst:.2e}"


def _revival_identity():
    params = zeeman.ZeemanParams()
    _, period = zeeman.larmor(params)
    recs = zeeman.revival_scan(zeeman.GroundDM.edge_pumped(), params, zeeman.ReadProjection(), [n * period for n in range(5)])
    a0 = abs(recs[0].amplitude)
    worst = max(
        abs(abs(r.amplitude) / (a0 * math.exp(-params.gamma_B * r.t_s)) - 1) for r in recs[1:]
    )
    return worst < 1e-9, f"max relative error {worst:.2e}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "lg orthonormality": _orthonormality,
    "charge recovery": _charges,
    "mirror involution": _mirror_involution,
    "g_R continuity": _pulse_continuity,
    "precession periodicity": _precession,
    "full-revival identity": _revival_identity,
}


def run() -> list[tuple[str, bool, str]]:
    results = []
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # a crash counts as a failed invariant
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
