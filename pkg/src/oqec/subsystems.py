"""Subsystem decompositions ``H = (H^A (x) H^B) (+) K`` and noiseless-subsystem checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import noise_commutant_blocks
from .errors import DimensionMismatch, MatrixUnitIdentityViolation, NotIsometry
from .matrix_core import (
    DEFAULT_ATOL,
    QuantumChannel,
    apply_channel,
    as_matrix,
    dag,
    fro,
    hermitian_basis,
)


@dataclass(frozen=True, eq=False)
class SubsystemDecomposition:
    """Isometric embedding of ``H^A (x) H^B`` into ``H``.

    Column ``k * n + l`` of ``embedding`` is ``|alpha_k> (x) |beta_l>``.
    """

    dim: int
    m: int
    n: int
    embedding: np.ndarray
    labels_a: tuple[str, ...] = ()
    labels_b: tuple[str, ...] = ()

    @property
    def k_dim(self) -> int:
        return self.dim - self.m * self.n

    def compress(self, sigma: np.ndarray) -> np.ndarray:
        """``V^dag sigma V`` as an ``(m, n, m, n)`` tensor."""
        v = self.embedding
        return (dag(v) @ sigma @ v).reshape(self.m, self.n, self.m, self.n)

    def embed(self, sigma_a, sigma_b) -> np.ndarray:
        """The operator ``sigma_a (x) sigma_b`` placed inside ``H``."""
        v = self.embedding
        return v @ np.kron(sigma_a, sigma_b) @ dag(v)


@dataclass(frozen=True, eq=False)
class MatrixUnitFamily:
    """``P_kl = |alpha_k><alpha_l| (x) 1_n`` together with the derived projectors."""

    units: np.ndarray  # (m, m, d, d)
    p_frak: np.ndarray = field(init=False, repr=False)
    p_frak_perp: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.units.shape[-1]
        p = sum(self.units[k, k] for k in range(self.m))
        object.__setattr__(self, "p_frak", p)
        object.__setattr__(self, "p_frak_perp", np.eye(d) - p)

    @property
    def m(self) -> int:
        return self.units.shape[0]

    @property
    def dim(self) -> int:
        return self.units.shape[-1]

    @property
    def projectors(self) -> list[np.ndarray]:
        return [self.units[k, k] for k in range(self.m)]

    def identity_residuals(self) -> dict[str, float]:
        u, m = self.units, self.m
        sandwich = max(fro(u[k, l] - u[k, k] @ u[k, l] @ u[l, l]) for k in range(m) for l in range(m))
        adjoint = max(fro(dag(u[k, l]) - u[l, k]) for k in range(m) for l in range(m))
        product = 0.0
        for k in range(m):
            for l in range(m):
                for l2 in range(m):
                    for k2 in range(m):
                        want = u[k, k2] if l == l2 else 0
                        product = max(product, fro(u[k, l] @ u[l2, k2] - want))
        return {"P_kl = P_k P_kl P_l": sandwich, "P_kl^dag = P_lk": adjoint, "P_kl P_l'k' = d_ll' P_kk'": product}


def matrix_units(decomp: SubsystemDecomposition) -> MatrixUnitFamily:
    m, n, v = decomp.m, decomp.n, decomp.embedding
    units = np.empty((m, m, decomp.dim, decomp.dim), dtype=np.complex128)
    for k in range(m):
        for l in range(m):
            e = np.zeros((m, m))
            e[k, l] = 1
            units[k, l] = v @ np.kron(e, np.eye(n)) @ dag(v)
    return MatrixUnitFamily(units)


def build_decomposition(
    embedding, m: int, n: int, atol: float = DEFAULT_ATOL
) -> tuple[SubsystemDecomposition, MatrixUnitFamily]:
    """Validate an embedding and build its matrix units.

    Raises
    ------
    NotIsometry
        ``||V^dag V - 1||_F > atol``.
    MatrixUnitIdentityViolation
        One of the three matrix-unit identities fails by more than ``atol``.
    """
    v = as_matrix(embedding, "embedding")
    d = v.shape[0]
    if v.shape[1] != m * n:
        raise DimensionMismatch(f"embedding has {v.shape[1]} columns, expected m*n = {m * n}")
    if m * n > d:
        raise DimensionMismatch(f"m*n = {m * n} exceeds ambient dimension {d}")
    defect = fro(dag(v) @ v - np.eye(m * n))
    if defect > atol:
        raise NotIsometry(f"embedding isometry defect {defect:.3e}")
    decomp = SubsystemDecomposition(d, m, n, v)
    mu = matrix_units(decomp)
    for name, res in mu.identity_residuals().items():
        if res > atol:
            raise MatrixUnitIdentityViolation(name, res)
    return decomp, mu


def product_decomposition(m: int, n: int, k_dim: int = 0, atol: float = DEFAULT_ATOL):
    """Standard basis embedding of ``C^m (x) C^n`` as the first ``m*n`` coordinates."""
    d = m * n + k_dim
    return build_decomposition(np.eye(d)[:, : m * n], m, n, atol)


def code_decomposition(p_code, atol: float = DEFAULT_ATOL):
    """``m = 1`` decomposition whose single sector is the range of a projector."""
    p = as_matrix(p_code, "projector")
    w, v = np.linalg.eigh((p + dag(p)) / 2)
    cols = v[:, w > 0.5][:, ::-1]
    return build_decomposition(cols, 1, cols.shape[1], atol)


def gamma_map(mu: MatrixUnitFamily, sigma) -> np.ndarray:
    """``sum_kl P_kl sigma P_kl^dag``."""
    sigma = as_matrix(sigma, "sigma")
    if sigma.shape != (mu.dim, mu.dim):
        raise DimensionMismatch(f"sigma has shape {sigma.shape}, expected {(mu.dim, mu.dim)}")
    u = mu.units
    return np.einsum("klij,jr,klsr->is", u, sigma, u.conj())


def partial_trace_a(decomp: SubsystemDecomposition, sigma) -> np.ndarray:
    """Trace out ``H^A`` from the part of ``sigma`` living on ``H^A (x) H^B``."""
    sigma = as_matrix(sigma, "sigma")
    if sigma.shape != (decomp.dim, decomp.dim):
        raise DimensionMismatch(f"sigma has shape {sigma.shape}, expected {(decomp.dim, decomp.dim)}")
    return np.einsum("kikj->ij", decomp.compress(sigma))


def partial_trace_b(decomp: SubsystemDecomposition, sigma) -> np.ndarray:
    sigma = as_matrix(sigma, "sigma")
    return np.einsum("kili->kl", decomp.compress(sigma))


@dataclass
class NSVerdict:
    ok: bool
    max_residual: float
    variant: int
    witness: dict | None = None

    def to_dict(self) -> dict:
        from .serialization import matrix_to_json

        w = None
        if self.witness is not None:
            w = {k: matrix_to_json(v) for k, v in self.witness.items()}
        return {"ok": self.ok, "max_residual": self.max_residual, "variant": self.variant, "witness": w}


def _product_fit_residual(decomp, out, sigma_bs):
    """Fit one ``tau^A`` to ``out_j ~ tau (x) sigma_b_j`` across all ``j``.

    ``out`` is a list of channel outputs for inputs that share ``sigma^A``.
    By linearity in ``sigma^B`` the same ``tau^A`` must serve every ``sigma^B``,
    so it is fitted jointly by least squares. Returns per-``j`` residuals
    including any weight that leaked off ``H^A (x) H^B``.
    """
    comps = [decomp.compress(o) for o in out]
    num = sum(np.einsum("kilj,ij->kl", c, sb.conj()) for c, sb in zip(comps, sigma_bs))
    tau = num / sum(fro(sb) ** 2 for sb in sigma_bs)
    res = []
    v = decomp.embedding
    for o, c, sb in zip(out, comps, sigma_bs):
        inside = v @ c.reshape(decomp.m * decomp.n, -1) @ dag(v)
        leak = fro(o - inside)
        fit = fro(c.reshape(decomp.m * decomp.n, -1) - np.kron(tau, sb))
        res.append(float(np.hypot(leak, fit)))
    return res


def check_ns(
    ch: QuantumChannel,
    decomp: SubsystemDecomposition,
    variant: int = 1,
    atol: float = DEFAULT_ATOL,
) -> NSVerdict:
    """Test whether ``H^B`` is a noiseless subsystem of ``ch``.

    variant 1
        ``E(sA (x) sB) = tau^A (x) sB`` for all ``sA``, ``sB``.
    variant 2
        ``E(1^A (x) sB) = tau^A (x) sB`` for all ``sB``.
    variant 3
        ``Tr_A(P E(s) P) = Tr_A(s)`` for all ``s = sA (x) sB``.

    Each is linear in its inputs and is checked on Hermitian operator bases.
    The witness holds the ``sigma_a``/``sigma_b`` pair with the largest residual.
    """
    if ch.dim != decomp.dim:
        raise DimensionMismatch(f"channel dimension {ch.dim} vs decomposition dimension {decomp.dim}")
    m, n = decomp.m, decomp.n
    basis_a = hermitian_basis(m)
    basis_b = hermitian_basis(n)
    worst, witness = 0.0, None

    def consider(res, sa, sb):
        nonlocal worst, witness
        if res > worst:
            worst, witness = res, {"sigma_a": sa, "sigma_b": sb}

    if variant in (1, 2):
        a_inputs = basis_a if variant == 1 else [np.eye(m)]
        for sa in a_inputs:
            outs = [apply_channel(ch, decomp.embed(sa, sb)) for sb in basis_b]
            for res, sb in zip(_product_fit_residual(decomp, outs, basis_b), basis_b):
                consider(res, sa, sb)
    elif variant == 3:
        for sa in basis_a:
            for sb in basis_b:
                sigma = decomp.embed(sa, sb)
                out = apply_channel(ch, sigma)
                consider(fro(partial_trace_a(decomp, out) - partial_trace_a(decomp, sigma)), sa, sb)
    else:
        raise ValueError(f"variant must be 1, 2 or 3, got {variant}")
    ok = worst <= atol
    return NSVerdict(ok, worst, variant, None if ok else witness)


def check_theorem1(ch: QuantumChannel, mu: MatrixUnitFamily, atol: float = DEFAULT_ATOL):
    """Check ``P_k E_a P_l = lambda_akl P_kl`` and ``P_perp E_a P = 0``.

    Returns ``(ok, LambdaTensor)`` with ``values[a, k, l] = lambda_akl``.
    """
    from .correction import LambdaTensor

    if ch.dim != mu.dim:
        raise DimensionMismatch(f"channel dimension {ch.dim} vs matrix units dimension {mu.dim}")
    u, m = mu.units, mu.m
    n = np.trace(u[0, 0]).real
    lam = np.zeros((len(ch), m, m), dtype=np.complex128)
    worst = 0.0
    for a, e in enumerate(ch.kraus):
        for k in range(m):
            for l in range(m):
                block = u[k, k] @ e @ u[l, l]
                lam[a, k, l] = np.trace(dag(u[k, l]) @ block) / n
                worst = max(worst, fro(block - lam[a, k, l] * u[k, l]))
        worst = max(worst, fro(mu.p_frak_perp @ e @ mu.p_frak))
    return worst <= atol, LambdaTensor("ns", lam, worst)


def leak_into_code(ch: QuantumChannel, mu: MatrixUnitFamily) -> float:
    """Largest ``||P E_a P_perp||_F``: weight carried from ``K`` into the protected sector."""
    return max(fro(mu.p_frak @ e @ mu.p_frak_perp) for e in ch.kraus)


@dataclass(frozen=True, eq=False)
class NoiselessSubsystem:
    decomposition: SubsystemDecomposition
    units: MatrixUnitFamily
    lam: object

    @property
    def carries_qubit(self) -> bool:
        return self.decomposition.n >= 2


def find_noiseless_subsystems(
    ch: QuantumChannel, atol: float = DEFAULT_ATOL, seed: int = 0
) -> list[NoiselessSubsystem]:
    """Noiseless subsystems read off the blocks of the noise commutant.

    Every block ``1_m (x) M_n`` of the commutant yields a candidate; each is
    re-verified with :func:`check_theorem1` and :func:`check_ns` and dropped
    if either fails. Blocks with ``n = 1`` are kept but report
    ``carries_qubit = False``.
    """
    st = noise_commutant_blocks(ch, atol, seed=seed)
    found = []
    for j, (m, n) in enumerate(st.blocks):
        decomp, mu = build_decomposition(st.block_columns(j), m, n, 10 * atol)
        ok1, lam = check_theorem1(ch, mu, 10 * atol)
        if ok1 and check_ns(ch, decomp, 1, 10 * atol).ok:
            found.append(NoiselessSubsystem(decomp, mu, lam))
    return found
