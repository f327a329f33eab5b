"""
Text formats for wavefunctions and unitary matrices.

Wavefunction file::

    M n_particles
    <2M-char 0/1 occupation string> <re> <im>
    ...

Occupation character k is canonical spin-orbital k (orbital k // 2, spin
k % 2 with up = 0).  Canonical files list determinants in increasing bitmask
order with numbers written as ``%.16e``, so writing a parsed canonical file
reproduces it byte for byte.

Unitary file: CSV with M rows of 2M numbers, ``re, im`` interleaved.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .errors import FormatError
from .fock import FockState, OrbitalRotation, det_from_string, det_to_string


def _num(x: float) -> str:
    return f"{x + 0.0:.16e}"  # + 0.0 folds -0.0 into 0.0


def format_wavefunction(state: FockState) -> str:
    lines = [f"{state.M} {state.n_particles}"]
    for d, a in zip(state.dets, state.amps):
        lines.append(f"{det_to_string(int(d), state.M)} {_num(a.real)} {_num(a.imag)}")
    return "\n".join(lines) + "\n"


def write_wavefunction(state: FockState, path) -> None:
    Path(path).write_text(format_wavefunction(state))


def parse_wavefunction(text: str, path=None) -> FockState:
    rows = [(k + 1, ln) for k, ln in enumerate(text.splitlines()) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise FormatError("empty wavefunction file", path)
    lineno, header = rows[0]
    parts = header.split()
    try:
        M, n = (int(p) for p in parts)
    except ValueError:
        raise FormatError("header must be 'M n_particles'", path, lineno, 1) from None
    if M <= 0 or not 0 <= n <= 2 * M:
        raise FormatError(f"invalid header values M={M}, n_particles={n}", path, lineno, 1)
    dets, amps = [], []
    seen = set()
    for lineno, ln in rows[1:]:
        fields = ln.split()
        if len(fields) != 3:
            raise FormatError(f"expected 3 fields, found {len(fields)}", path, lineno, 1)
        bits = fields[0]
        cols = [m.start() + 1 for m in re.finditer(r"\S+", ln)]
        if len(bits) != 2 * M or set(bits) - {"0", "1"}:
            raise FormatError(f"occupation string must be {2 * M} characters of 0/1", path, lineno, 1)
        if bits.count("1") != n:
            raise FormatError(
                f"determinant has {bits.count('1')} electrons, header says {n}", path, lineno, 1
            )
        values = []
        for field, col in zip(fields[1:], cols[1:]):
            try:
                x = float(field)
            except ValueError:
                raise FormatError(f"amplitude {field!r} is not a number", path, lineno, col) from None
            if not math.isfinite(x):
                raise FormatError("non-finite amplitude", path, lineno, col)
            values.append(x)
        re_, im_ = values
        det = det_from_string(bits)
        if det in seen:
            raise FormatError("duplicate determinant", path, lineno, 1)
        seen.add(det)
        dets.append(det)
        amps.append(complex(re_, im_))
    return FockState(M, n, dets, amps, prune=0.0)


def read_wavefunction(path) -> FockState:
    path = Path(path)
    return parse_wavefunction(path.read_text(), path)


def write_unitary(U: OrbitalRotation, path) -> None:
    lines = []
    for row in U.matrix:
        lines.append(",".join(f"{_num(x.real)},{_num(x.imag)}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_unitary(path) -> OrbitalRotation:
    path = Path(path)
    rows = []
    for lineno, ln in enumerate(path.read_text().splitlines(), 1):
        if not ln.strip():
            continue
        cells = ln.split(",")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            col = next(k for k, c in enumerate(cells, 1) if not _is_float(c))
            raise FormatError("non-numeric entry", path, lineno, col) from None
        if len(vals) % 2:
            raise FormatError("odd number of entries; expected re,im pairs", path, lineno)
        rows.append((lineno, vals))
    if not rows:
        raise FormatError("empty unitary file", path)
    M = len(rows)
    for lineno, vals in rows:
        if len(vals) != 2 * M:
            raise FormatError(f"expected {2 * M} numbers per row, found {len(vals)}", path, lineno)
    arr = np.array([v for _, v in rows])
    try:
        return OrbitalRotation(arr[:, 0::2] + 1j * arr[:, 1::2])
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True
