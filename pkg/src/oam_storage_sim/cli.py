"""Command-line entry point ``oam-storage-sim``.

Exit codes: 0 success, 2 config error, 3 numerical-invariant violation,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import optics, selftest
from .ensemble import approx_coherence, g_r_peak_time
from .errors import ConfigError, InvalidInput, IoFailure, NumericalInvariantError
from .io.config import config_digest, load_config
from .io.writers import format_number, read_pgm, write_pgm, write_trace_csv
from .pipeline import g_r_trace, retrieve_at, retrieve_field, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or cfg.output_dir or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(out, exc.strerror or str(exc)) from exc
    return out


def cmd_render_write(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    field = optics.sample_superposition(cfg.modes, cfg.grid)
    pgm = out / "write_beam.pgm"
    write_pgm(field.intensity(), pgm, digest=config_digest(cfg))
    npz = out / "write_beam_field.npz"
    try:
        np.savez(npz, data=field.data, pitch=field.pitch, origin=np.array(field.origin), direction=field.direction.value)
    except OSError as exc:
        raise IoFailure(npz, exc.strerror or str(exc)) from exc
    print(pgm)
    print(npz)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    manifest = run_experiment(cfg, out)
    for name, digest in manifest.files:
        print(f"{digest}  {out / name}")
    return EXIT_OK


def cmd_retrieve(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    record, frame, peak = retrieve_at(cfg, args.ts)
    stem = f"retrieved_t{args.ts:09.4f}us"
    write_pgm(frame.image, out / f"{stem}.pgm", normalization=peak if peak > 0 else "global_peak", digest=config_digest(cfg))
    t, g = g_r_trace(cfg.lambda_params, cfg.read_window)
    write_trace_csv(t, g, out / "g_r_trace.csv")
    a = record.amplitude
    print(
        f"t_us={format_number(record.t_s)} re_amp={format_number(a.real)} "
        f"im_amp={format_number(a.imag)} intensity={format_number(record.intensity)}"
    )
    return EXIT_OK


def _load_field(path: Path) -> optics.ComplexField:
    try:
        with np.load(path) as doc:
            return optics.ComplexField(
                doc["data"], float(doc["pitch"]), tuple(doc["origin"]), optics.Direction(str(doc["direction"]))
            )
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from exc
    except KeyError as exc:
        raise InvalidInput(f"{path}: missing array {exc}") from exc


def cmd_charge(args) -> int:
    path = Path(args.source)
    center = tuple(args.center)
    if path.suffix == ".npz":
        field = _load_field(path)
        print(f"lab_charge={optics.measure_charge(field, args.radius, center)}")
        print(f"own_frame_charge={optics.own_frame_charge(field, args.radius, center)}")
        return EXIT_OK
    if path.suffix == ".pgm":
        try:
            pixels, _ = read_pgm(path)
        except OSError as exc:
            raise IoFailure(path, exc.strerror or str(exc)) from exc
        image = pixels[::-1].astype(float)
        h, w = image.shape
        grid = optics.GridSpec(w, h, args.pitch)
        radii = np.linspace(0.1 * args.radius, args.radius, 40)
        fit = optics.spiral_sense(image, grid, center, radii)
        print(f"spiral_sense={fit.sense:+d} slope_rad_per_um={format_number(fit.slope)}")
        return EXIT_OK
    cfg = load_config(path)
    wp = optics.sample_superposition(cfg.modes, cfg.grid)
    t_read = g_r_peak_time(cfg.lambda_params, cfg.read_window)
    retrieved = retrieve_field(approx_coherence(wp, cfg.lambda_params, t_read, 0.0))
    print(f"write_charge={optics.measure_charge(wp, args.radius, center)}")
    print(f"retrieved_lab_charge={optics.measure_charge(retrieved, args.radius, center)}")
    print(f"retrieved_own_frame_charge={optics.own_frame_charge(retrieved, args.radius, center)}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = selftest.run()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oam-storage-sim", description="Stored OAM light: write, precess, retrieve.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render-write", help="sample the structured write beam W' and image it")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render_write)

    p = sub.add_parser("sweep", help="storage-time scan: revival CSV, frames and manifest")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("retrieve", help="single retrieval image plus the g_R pulse trace")
    p.add_argument("config")
    p.add_argument("--ts", type=float, required=True, help="storage time in us")
    p.add_argument("--out")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("charge", help="winding of a config's beams, a saved .npz field, or a .pgm interferogram's spiral sense")
    p.add_argument("source")
    p.add_argument("--radius", type=float, required=True, help="circle radius in um")
    p.add_argument("--center", type=float, nargs=2, default=(0.0, 0.0), metavar=("X", "Y"))
    p.add_argument("--pitch", type=float, default=1.0, help="um per pixel for .pgm input")
    p.set_defaults(func=cmd_charge)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except IoFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInput as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
