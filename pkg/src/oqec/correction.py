"""Correctability conditions, recovery construction and scheme conversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotCorrectable,
    NotIsometry,
    NotProjector,
    NotUnitary,
    NotVerified,
)
from .matrix_core import (
    DEFAULT_ATOL,
    QuantumChannel,
    as_matrix,
    compose,
    dag,
    fro,
    psd_sqrt,
    validate_channel,
)
from .subsystems import MatrixUnitFamily, SubsystemDecomposition, check_ns


@dataclass(frozen=True, eq=False)
class LambdaTensor:
    """Coefficients of a correctability relation.

    ``kind`` is ``"standard"`` (``values[a, b]``), ``"ns"`` (``values[a, k, l]``)
    or ``"unified"`` (``values[a, b, k, l]``). ``max_residual`` is the largest
    Frobenius defect of the defining relation over all indices.
    """

    kind: str
    values: np.ndarray
    max_residual: float

    def to_json(self):
        from .serialization import tensor_to_json

        return tensor_to_json(self.values)


def _check_projector(p: np.ndarray, atol: float) -> int:
    herm = fro(p - dag(p))
    idem = fro(p @ p - p)
    if herm > atol or idem > atol:
        raise NotProjector(f"not an orthogonal projector (hermiticity {herm:.3e}, idempotency {idem:.3e})")
    rank = int(round(np.trace(p).real))
    if rank < 1:
        raise NotProjector("projector has rank 0")
    return rank


def check_standard_condition(ch: QuantumChannel, p_code, atol: float = DEFAULT_ATOL):
    """Check ``P E_a^dag E_b P = lambda_ab P`` for all ``a, b``.

    Returns ``(ok, LambdaTensor)``.
    """
    p = as_matrix(p_code, "projector")
    if p.shape != (ch.dim, ch.dim):
        raise DimensionMismatch(f"projector shape {p.shape} vs channel dimension {ch.dim}")
    rank = _check_projector(p, atol)
    k = ch.stack
    n_k = len(k)
    lam = np.zeros((n_k, n_k), dtype=np.complex128)
    worst = 0.0
    for a in range(n_k):
        for b in range(n_k):
            block = p @ dag(k[a]) @ k[b] @ p
            lam[a, b] = np.trace(block) / rank
            worst = max(worst, fro(block - lam[a, b] * p))
    return worst <= atol, LambdaTensor("standard", lam, worst)


def build_standard_recovery(ch: QuantumChannel, p_code, atol: float = DEFAULT_ATOL) -> QuantumChannel:
    """Recovery channel ``R`` with ``R(E(sigma)) = sigma`` on the code.

    The error family is rotated so that ``P F_c^dag F_d P = delta_cd d_c P``;
    each ``F_c P / sqrt(d_c)`` is then an isometry onto mutually orthogonal
    ranges and ``R_c`` is its adjoint. Components with ``d_c <= atol`` are
    dropped and ``sqrt(1 - sum R_c^dag R_c)`` restores trace preservation.

    Raises
    ------
    NotCorrectable
        The standard condition fails.
    """
    ok, lam = check_standard_condition(ch, p_code, atol)
    if not ok:
        raise NotCorrectable(f"code is not correctable (residual {lam.max_residual:.3e})")
    p = as_matrix(p_code)
    herm = (lam.values + dag(lam.values)) / 2
    evals, w = np.linalg.eigh(herm)
    # F_c = sum_a w[a, c] E_a diagonalises lambda
    f = np.einsum("ac,aij->cij", w, ch.stack)
    ops = []
    for c in range(len(evals)):
        if evals[c] <= atol:
            continue
        ops.append(dag(f[c] @ p) / np.sqrt(evals[c]))
    q = sum(dag(r) @ r for r in ops)
    rest = psd_sqrt(np.eye(ch.dim) - q)
    if fro(rest) > atol:
        ops.append(rest)
    return validate_channel(ops, atol=10 * atol, label=f"recovery[{ch.label}]")


@dataclass(frozen=True, eq=False)
class CorrectableTriple:
    recovery: QuantumChannel
    noise: QuantumChannel
    decomposition: SubsystemDecomposition
    units: MatrixUnitFamily
    verified: bool
    residual: float


def check_correctable_triple(
    r: QuantumChannel,
    e: QuantumChannel,
    decomp: SubsystemDecomposition,
    mu: MatrixUnitFamily,
    atol: float = DEFAULT_ATOL,
) -> CorrectableTriple:
    """Verify ``Tr_A o P o R o E = Tr_A`` on the protected sector.

    Equivalent to ``H^B`` being a noiseless subsystem of ``R o E``; checked
    with the partial-trace form of :func:`check_ns`.
    """
    if not (r.dim == e.dim == decomp.dim):
        raise DimensionMismatch(f"dimensions {r.dim}, {e.dim}, {decomp.dim} do not match")
    verdict = check_ns(compose(r, e, atol), decomp, 3, atol)
    return CorrectableTriple(r, e, decomp, mu, verdict.ok, verdict.max_residual)


def check_unified_condition(ch: QuantumChannel, mu: MatrixUnitFamily, atol: float = DEFAULT_ATOL):
    """Check ``P_k E_a^dag E_b P_l = lambda_abkl P_kl`` for all indices.

    Returns ``(ok, LambdaTensor)`` with ``values[a, b, k, l]``.
    """
    if ch.dim != mu.dim:
        raise DimensionMismatch(f"channel dimension {ch.dim} vs matrix units dimension {mu.dim}")
    u, m = mu.units, mu.m
    n = np.trace(u[0, 0]).real
    k_ops = ch.stack
    n_k = len(k_ops)
    lam = np.zeros((n_k, n_k, m, m), dtype=np.complex128)
    worst = 0.0
    for a in range(n_k):
        for b in range(n_k):
            prod = dag(k_ops[a]) @ k_ops[b]
            for k in range(m):
                for l in range(m):
                    block = u[k, k] @ prod @ u[l, l]
                    lam[a, b, k, l] = np.trace(dag(u[k, l]) @ block) / n
                    worst = max(worst, fro(block - lam[a, b, k, l] * u[k, l]))
    return worst <= atol, LambdaTensor("unified", lam, worst)


def transform_lambda(
    lam: LambdaTensor, u, w, atol: float = DEFAULT_ATOL
) -> LambdaTensor:
    """Coefficients after a change of sector basis and of Kraus representation.

    ``u`` rotates the sector basis, ``alpha'_k = sum_l u[k, l] alpha_l``, and
    ``w`` mixes Kraus operators, ``F_a = sum_b w[a, b] E_b``. Then
    ``lambda'_abkl = sum conj(u[k,k']) u[l,l'] conj(w[a,a']) w[b,b'] lambda_a'b'k'l'``.
    """
    u = as_matrix(u, "u")
    w = as_matrix(w, "w")
    if u.shape[0] != u.shape[1] or fro(dag(u) @ u - np.eye(len(u))) > atol:
        raise NotUnitary("sector basis change must be unitary")
    if fro(dag(w) @ w - np.eye(w.shape[1])) > atol:
        raise NotIsometry("Kraus mixing must be an isometry (w^dag w = 1)")
    vals = np.einsum("kK,lL,aA,bB,ABKL->abkl", u.conj(), u, w.conj(), w, lam.values)
    return LambdaTensor(lam.kind, vals, lam.max_residual)


def rotate_decomposition(decomp: SubsystemDecomposition, u, atol: float = DEFAULT_ATOL):
    """Decomposition with sector basis ``alpha'_k = sum_l u[k, l] alpha_l``."""
    from .subsystems import build_decomposition

    v = decomp.embedding @ np.kron(np.asarray(u).T, np.eye(decomp.n))
    return build_decomposition(v, decomp.m, decomp.n, 10 * atol)


def mix_kraus(ch: QuantumChannel, w, atol: float = DEFAULT_ATOL) -> QuantumChannel:
    """Same channel written with ``F_a = sum_b w[a, b] E_b``."""
    f = np.einsum("ab,bij->aij", np.asarray(w, dtype=np.complex128), ch.stack)
    return validate_channel(list(f), atol=10 * atol, label=ch.label)


def convert_to_standard(triple: CorrectableTriple, k: int, atol: float = DEFAULT_ATOL):
    """Turn a correctable triple into a standard scheme on the code ``P_k``.

    Returns ``(recovery, code_projector)`` where ``recovery`` has Kraus
    operators ``P_kl R_c`` completed to a trace-preserving map. ``k`` is a
    0-based sector index.

    Raises
    ------
    NotVerified
        The triple did not pass :func:`check_correctable_triple`.
    IndexOutOfRange
        ``k`` is not in ``range(m)``.
    """
    if not triple.verified:
        raise NotVerified("triple is not a verified correctable triple")
    mu = triple.units
    if not 0 <= k < mu.m:
        raise IndexOutOfRange(f"sector index {k} outside range({mu.m})")
    ops = [mu.units[k, l] @ r for r in triple.recovery.kraus for l in range(mu.m)]
    q = sum(dag(o) @ o for o in ops)
    rest = psd_sqrt(np.eye(mu.dim) - q)
    if fro(rest) > atol:
        ops.append(rest)
    rec = validate_channel(ops, atol=10 * atol, label=f"P_{k} o {triple.recovery.label}")
    return rec, mu.units[k, k].copy()


@dataclass(frozen=True)
class NecessityReport:
    triple_correctable: bool
    eq8_holds: bool
    triple_residual: float
    eq8_residual: float

    @property
    def violation(self) -> bool:
        return self.triple_correctable and not self.eq8_holds


def theorem2_necessity_audit(
    ch: QuantumChannel,
    r: QuantumChannel,
    decomp: SubsystemDecomposition,
    mu: MatrixUnitFamily,
    atol: float = DEFAULT_ATOL,
) -> NecessityReport:
    """Evaluate both the triple condition and the unified condition.

    A correctable triple whose noise fails the unified condition would
    contradict necessity; ``violation`` flags that combination.
    """
    triple = check_correctable_triple(r, ch, decomp, mu, atol)
    ok8, lam = check_unified_condition(ch, mu, atol)
    return NecessityReport(triple.verified, ok8, triple.residual, lam.max_residual)
