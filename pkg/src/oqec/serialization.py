"""JSON formats for channels, decompositions and reports.

Complex numbers are ``[re, im]`` pairs. Floats are written with ``repr``
precision (shortest round-trip form, up to 17 significant digits), so a
save/load cycle reproduces the arrays bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .matrix_core import DEFAULT_ATOL, QuantumChannel, validate_channel


def _pair(z) -> list[float]:
    return [float(z.real), float(z.imag)]


def matrix_to_json(a) -> list:
    """Nested rows of ``[re, im]`` pairs."""
    return [[_pair(z) for z in row] for row in np.asarray(a, dtype=np.complex128)]


def flat_matrix_to_json(a) -> list:
    """Row-major flat list of ``[re, im]`` pairs."""
    return [_pair(z) for z in np.asarray(a, dtype=np.complex128).ravel()]


def tensor_to_json(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        return _pair(a)
    return [tensor_to_json(x) for x in a]


def matrix_from_json(data, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Decode either nested rows or a flat row-major list (then ``shape`` is needed)."""
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    z = arr[..., 0] + 1j * arr[..., 1]
    if z.ndim == 1:
        if shape is None:
            raise ValueError("flat matrix needs an explicit shape")
        z = z.reshape(shape)
    if shape is not None and z.shape != tuple(shape):
        raise ValueError(f"matrix has shape {z.shape}, expected {tuple(shape)}")
    return z


def channel_to_dict(ch: QuantumChannel) -> dict:
    return {"dim": ch.dim, "label": ch.label, "kraus": [flat_matrix_to_json(k) for k in ch.kraus]}


def channel_from_dict(data: dict, atol: float = DEFAULT_ATOL) -> QuantumChannel:
    d = int(data["dim"])
    ops = [matrix_from_json(k, (d, d)) for k in data["kraus"]]
    return validate_channel(ops, atol=atol, label=str(data.get("label", "")))


def decomposition_to_dict(decomp) -> dict:
    return {"dim": decomp.dim, "m": decomp.m, "n": decomp.n, "embedding": matrix_to_json(decomp.embedding)}


def decomposition_from_dict(data: dict, atol: float = DEFAULT_ATOL):
    from .subsystems import build_decomposition

    d, m, n = int(data["dim"]), int(data["m"]), int(data["n"])
    v = matrix_from_json(data["embedding"], (d, m * n))
    return build_decomposition(v, m, n, atol)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def save_json(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def load_json(path):
    return json.loads(Path(path).read_text())
