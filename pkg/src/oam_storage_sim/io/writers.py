"""Bit-exact PGM and CSV writers (and the readers used to check them)."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidInput, IoFailure
from ..zeeman import RevivalRecord

CSV_HEADER = "t_us,re_amp,im_amp,intensity"
PGM_TAG = "oam-storage-sim"


def format_number(x: float) -> str:
    """Positional decimal, 9 significant digits, locale independent."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInput(f"cannot format non-finite value {x!r}")
    return np.format_float_positional(x + 0.0, precision=9, unique=False, fractional=False, trim="-")


def _write_bytes(path, payload: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(path, exc.strerror or str(exc)) from exc


def pgm_bytes(image, normalization="global_peak", digest: str = "") -> bytes:
    """Encode a non-negative image as binary P5 with maxval 255.

    ``normalization`` is ``"global_peak"`` (brightest pixel -> 255) or a
    number giving the value that maps to 255; larger values clip. Row 0 of
    the array is the smallest y, so rows are written bottom-up to keep +y
    pointing up in viewers.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise InvalidInput("image must be 2-D")
    if not np.all(np.isfinite(img)) or np.any(img < 0):
        raise InvalidInput("image must be finite and non-negative")
    if isinstance(normalization, str):
        if normalization != "global_peak":
            raise InvalidInput(f"unknown normalization {normalization!r}")
        top = float(img.max())
    else:
        top = float(normalization)
        if not top > 0:
            raise InvalidInput("fixed normalization must be > 0")
    if top > 0:
        scaled = np.floor(img * (255.0 / top) + 0.5)
    else:
        scaled = np.zeros_like(img)
    pixels = np.clip(scaled, 0, 255).astype(np.uint8)[::-1]
    h, w = pixels.shape
    header = f"P5\n# {PGM_TAG} {digest}\n{w} {h}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def write_pgm(image, path, normalization="global_peak", digest: str = "") -> None:
    _write_bytes(path, pgm_bytes(image, normalization, digest))


def read_pgm(path) -> tuple[np.ndarray, str]:
    """Read a P5 file written by :func:`write_pgm`; returns (pixels top-down, comment)."""
    raw = Path(path).read_bytes()
    tokens: list[bytes] = []
    comment = ""
    pos = 0
    while len(tokens) < 4:
        while raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            end = raw.index(b"\n", pos)
            comment = raw[pos + 1 : end].decode("ascii").strip()
            pos = end + 1
            continue
        start = pos
        while not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise InvalidInput(f"{path}: not a binary PGM")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise InvalidInput(f"{path}: unsupported maxval {maxval}")
    data = np.frombuffer(raw[pos + 1 : pos + 1 + w * h], dtype=np.uint8).reshape(h, w)
    return data, comment


def csv_text(records: Sequence[RevivalRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        a = complex(r.amplitude)
        lines.append(",".join(format_number(v) for v in (r.t_s, a.real, a.imag, r.intensity)))
    return "\n".join(lines) + "\n"


def write_csv(records: Sequence[RevivalRecord], path) -> None:
    if any(b.t_s < a.t_s for a, b in zip(records, records[1:])):
        raise InvalidInput("records must be sorted by t_s")
    _write_bytes(path, csv_text(records).encode("ascii"))


def read_csv(path) -> list[RevivalRecord]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise InvalidInput(f"{path}: unexpected header {header!r}")
        return [RevivalRecord(float(t), complex(float(re), float(im)), float(i)) for t, re, im, i in reader]


def write_trace_csv(t: Iterable[float], g: Iterable[float], path) -> None:
    lines = ["t_us,g_r"] + [f"{format_number(a)},{format_number(b)}" for a, b in zip(t, g)]
    _write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))
