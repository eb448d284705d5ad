"""Dense complex matrices and Kraus-form quantum channels.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Vectorisation is
row-major throughout, so that ``vec(A @ X @ B) = kron(A, B.T) @ vec(X)``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotTracePreserving

DEFAULT_ATOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def fro(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A trace-preserving map ``sigma -> sum_a E_a sigma E_a^dag``.

    Build instances through :func:`validate_channel`; the constructor itself
    only checks shapes.
    """

    dim: int
    kraus: tuple[np.ndarray, ...]
    label: str = ""
    _stack: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ops = tuple(_frozen(k) for k in self.kraus)
        if not ops:
            raise DimensionMismatch("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.dim, self.dim):
                raise DimensionMismatch(
                    f"Kraus operator of shape {k.shape} in a channel of dimension {self.dim}"
                )
        object.__setattr__(self, "kraus", ops)
        stack = np.stack(ops)
        stack.setflags(write=False)
        object.__setattr__(self, "_stack", stack)

    def __len__(self) -> int:
        return len(self.kraus)

    def __call__(self, sigma) -> np.ndarray:
        return apply_channel(self, sigma)

    @property
    def stack(self) -> np.ndarray:
        """Kraus operators as an ``(n_kraus, dim, dim)`` array."""
        return self._stack


def trace_defect(kraus: Iterable[np.ndarray]) -> np.ndarray:
    ops = list(kraus)
    d = ops[0].shape[0]
    total = sum(dag(k) @ k for k in ops)
    return total - np.eye(d)


def validate_channel(
    kraus: Sequence, atol: float = DEFAULT_ATOL, label: str = ""
) -> QuantumChannel:
    """Check a Kraus family for shape consistency and trace preservation.

    Raises
    ------
    DimensionMismatch
        Empty family, non-square or unequal operators.
    NotTracePreserving
        ``||sum_a E_a^dag E_a - 1||_F > atol``.
    """
    ops = [as_matrix(k, "Kraus operator") for k in kraus]
    if not ops:
        raise DimensionMismatch("a channel needs at least one Kraus operator")
    d = ops[0].shape[0]
    for k in ops:
        if k.shape != (d, d):
            raise DimensionMismatch(f"expected {d}x{d} Kraus operators, got {k.shape}")
    defect = trace_defect(ops)
    res = fro(defect)
    if res > atol:
        raise NotTracePreserving(res, float(np.linalg.norm(defect, 2)))
    return QuantumChannel(d, tuple(ops), label)


def apply_channel(ch: QuantumChannel, sigma) -> np.ndarray:
    sigma = as_matrix(sigma, "sigma")
    if sigma.shape != (ch.dim, ch.dim):
        raise DimensionMismatch(f"sigma has shape {sigma.shape}, channel dimension is {ch.dim}")
    k = ch.stack
    return np.einsum("aij,jk,alk->il", k, sigma, k.conj())


def compose(outer: QuantumChannel, inner: QuantumChannel, atol: float = DEFAULT_ATOL) -> QuantumChannel:
    """The channel ``outer o inner`` with Kraus family ``{R_c E_a}``."""
    if outer.dim != inner.dim:
        raise DimensionMismatch(f"cannot compose dimensions {outer.dim} and {inner.dim}")
    ops = [r @ e for r in outer.kraus for e in inner.kraus]
    label = f"{outer.label} o {inner.label}" if outer.label or inner.label else ""
    # products of TP families are TP; slack absorbs round-off growth
    return validate_channel(ops, atol=10 * atol, label=label)


def is_unital(ch: QuantumChannel, atol: float = DEFAULT_ATOL) -> bool:
    return fro(apply_channel(ch, np.eye(ch.dim)) - np.eye(ch.dim)) <= atol


def superoperator(ch: QuantumChannel) -> np.ndarray:
    """Matrix ``S`` with ``vec(E(sigma)) = S @ vec(sigma)`` (row-major vec)."""
    return sum(np.kron(k, k.conj()) for k in ch.kraus)


def choi_matrix(ch: QuantumChannel) -> np.ndarray:
    """``sum_ij E(|i><j|) (x) |i><j|``; independent of the Kraus representation."""
    d = ch.dim
    c = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, j] = 1
            c += np.kron(apply_channel(ch, e), e)
    return c


def channels_equal(e: QuantumChannel, f: QuantumChannel, atol: float = DEFAULT_ATOL) -> bool:
    if e.dim != f.dim:
        return False
    return fro(choi_matrix(e) - choi_matrix(f)) <= atol


def kraus_equivalence(
    e: QuantumChannel, f: QuantumChannel, atol: float = DEFAULT_ATOL
) -> np.ndarray | None:
    """Find the unitary mixing ``u`` with ``F_b = sum_a u[b, a] E_a``.

    The shorter family is padded with zero operators so that ``u`` is square.
    Returns ``None`` when the two families describe different maps.
    """
    if e.dim != f.dim:
        raise DimensionMismatch(f"channels of dimension {e.dim} and {f.dim}")
    if not channels_equal(e, f, atol):
        return None
    n = max(len(e), len(f))
    d2 = e.dim * e.dim
    ve = np.zeros((d2, n), dtype=np.complex128)
    vf = np.zeros((d2, n), dtype=np.complex128)
    ve[:, : len(e)] = e.stack.reshape(len(e), d2).T
    vf[:, : len(f)] = f.stack.reshape(len(f), d2).T
    # Procrustes: VE VE^dag = VF VF^dag guarantees an exact unitary solution
    p, _, qh = np.linalg.svd(dag(ve) @ vf)
    w = p @ qh
    if fro(ve @ w - vf) > 10 * atol * max(1.0, np.sqrt(n)):
        return None
    return w.T


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorisation of a Ginibre matrix."""
    return random_isometry(dim, dim, rng)


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Random ``rows x cols`` isometry; phases of ``R`` are fixed so the law is unitarily invariant."""
    z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_channel(dim: int, n_kraus: int, seed: int) -> QuantumChannel:
    """Random channel from a seeded Stinespring isometry ``C^d -> C^d (x) C^n_kraus``."""
    if n_kraus < 1:
        raise ValueError("n_kraus must be at least 1")
    rng = np.random.default_rng(seed)
    v = random_isometry(dim * n_kraus, dim, rng)
    ops = [v[a * dim : (a + 1) * dim, :] for a in range(n_kraus)]
    return validate_channel(ops, label=f"random_channel(d={dim}, n={n_kraus}, seed={seed})")


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def hermitian_basis(k: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of ``M_k``.

    Diagonal units come first, then the symmetric and antisymmetric
    off-diagonal combinations, each normalised in Hilbert-Schmidt norm.
    """
    out = []
    for j in range(k):
        e = np.zeros((k, k), dtype=np.complex128)
        e[j, j] = 1
        out.append(e)
    s = 1 / np.sqrt(2)
    for j in range(k):
        for l in range(j + 1, k):
            e = np.zeros((k, k), dtype=np.complex128)
            e[j, l] = e[l, j] = s
            out.append(e)
            e = np.zeros((k, k), dtype=np.complex128)
            e[j, l] = -1j * s
            e[l, j] = 1j * s
            out.append(e)
    return out


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix, clipping round-off negatives."""
    a = (a + dag(a)) / 2
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0, None))) @ dag(v)
