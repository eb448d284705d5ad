"""Interaction algebras, commutants, fixed points and block decomposition.

Every operator space is stored as an orthonormal (Hilbert-Schmidt) basis.
Structure decomposition follows the usual numerical recipe for finite
dimensional *-algebras: split by the minimal central projections, then split
each central block by minimal projections of the algebra and glue them
together with partial isometries taken from the algebra itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClosureNotReached, DecompositionFailed
from .matrix_core import DEFAULT_ATOL, QuantumChannel, dag, fro, superoperator

CLUSTER_TOL = 1e-6
MAX_RETRIES = 5


def _orth(cols: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis for the column span of ``cols``, dropping directions below ``tol``."""
    if cols.size == 0:
        return cols.reshape(cols.shape[0], 0)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, s > tol]


def _null_space(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{x : m @ x = 0}`` up to ``tol``."""
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    cut = tol * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > cut))
    return vh[rank:].conj().T


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group sorted eigenvalues into runs whose consecutive gaps are ``<= tol``."""
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol * scale:
            groups.append(np.arange(start, i))
            start = i
    return groups


@dataclass(frozen=True, eq=False)
class OperatorAlgebra:
    """Linear span of ``d x d`` operators with an orthonormal basis.

    ``is_algebra`` marks multiplicatively closed spaces; a bare operator space
    (for instance a fixed-point set of a non-unital channel) has it ``False``.
    """

    dim: int
    basis: np.ndarray
    dagger_closed: bool = True
    is_algebra: bool = True
    _vectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.array(self.basis, dtype=np.complex128).reshape(-1, self.dim, self.dim)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "_vectors", b.reshape(len(b), -1).T)

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def vectors(self) -> np.ndarray:
        """Basis as columns of a ``d^2 x len`` matrix (row-major vec)."""
        return self._vectors

    @classmethod
    def span(cls, mats, dim: int, atol: float = DEFAULT_ATOL, **flags) -> OperatorAlgebra:
        mats = [np.asarray(m, dtype=np.complex128) for m in mats]
        if not mats:
            return cls(dim, np.zeros((0, dim, dim)), **flags)
        q = _orth(np.stack([m.ravel() for m in mats], axis=1), atol)
        return cls(dim, q.T.reshape(-1, dim, dim), **flags)

    def project(self, x: np.ndarray) -> np.ndarray:
        v = np.asarray(x, dtype=np.complex128).ravel()
        return (self.vectors @ (dag(self.vectors) @ v)).reshape(self.dim, self.dim)

    def distance(self, x: np.ndarray) -> float:
        """Frobenius distance from ``x`` to the span."""
        return fro(np.asarray(x) - self.project(x))

    def closure_residual(self) -> float:
        """Largest distance from a product of two basis elements to the span."""
        return max(
            (self.distance(x @ y) for x in self.basis for y in self.basis), default=0.0
        )

    def dagger_residual(self) -> float:
        return max((self.distance(dag(x)) for x in self.basis), default=0.0)


def containment_residual(small: OperatorAlgebra, big: OperatorAlgebra) -> float:
    """Largest distance from an orthonormal basis element of ``small`` to ``big``."""
    return max((big.distance(x) for x in small.basis), default=0.0)


def same_subspace(a: OperatorAlgebra, b: OperatorAlgebra, atol: float = DEFAULT_ATOL) -> bool:
    return (
        len(a) == len(b)
        and containment_residual(a, b) <= atol
        and containment_residual(b, a) <= atol
    )


def generate_algebra(gens, dim: int, atol: float = DEFAULT_ATOL) -> OperatorAlgebra:
    """The *-algebra generated by ``gens`` (adjoints are added automatically)."""
    gens = [np.asarray(g, dtype=np.complex128) for g in gens]
    gens = gens + [dag(g) for g in gens]
    q = _orth(np.stack([g.ravel() for g in gens], axis=1), atol)
    frontier = q
    for _ in range(dim * dim):
        # words of length k+1 are generators times words of length k
        cands = np.stack(
            [(g @ f.reshape(dim, dim)).ravel() for g in gens for f in frontier.T], axis=1
        )
        resid = cands - q @ (dag(q) @ cands)
        new = _orth(resid, atol * max(1.0, float(np.max(np.abs(cands)))))
        if new.shape[1] == 0:
            return OperatorAlgebra(dim, q.T.reshape(-1, dim, dim))
        # second pass keeps the accumulated basis orthonormal to machine precision
        new = new - q @ (dag(q) @ new)
        new, _ = np.linalg.qr(new)
        q = np.hstack([q, new])
        frontier = new
        if q.shape[1] > dim * dim:
            break
    raise ClosureNotReached(f"algebra closure did not settle within {dim * dim} rounds")


def generate_interaction_algebra(ch: QuantumChannel, atol: float = DEFAULT_ATOL) -> OperatorAlgebra:
    """*-algebra generated by the Kraus operators of ``ch`` and their adjoints."""
    return generate_algebra(ch.kraus, ch.dim, atol)


def _commutator_map(mats, dim: int) -> np.ndarray:
    eye = np.eye(dim)
    return np.vstack([np.kron(x, eye) - np.kron(eye, x.T) for x in mats])


def commutant(alg: OperatorAlgebra, atol: float = DEFAULT_ATOL) -> OperatorAlgebra:
    """All operators commuting with every basis element of ``alg``.

    For a dagger-closed ``alg`` the result is again a *-algebra.
    """
    d = alg.dim
    if len(alg) == 0:
        return OperatorAlgebra(d, np.eye(d * d).reshape(-1, d, d))
    ns = _null_space(_commutator_map(alg.basis, d), atol)
    return OperatorAlgebra(d, ns.T.reshape(-1, d, d), dagger_closed=alg.dagger_closed)


def center(alg: OperatorAlgebra, atol: float = DEFAULT_ATOL) -> OperatorAlgebra:
    """``alg`` intersected with its commutant."""
    d = alg.dim
    # column j holds the stacked commutators [X_i, B_j]
    cols = []
    for b in alg.basis:
        cols.append(np.concatenate([(x @ b - b @ x).ravel() for x in alg.basis]))
    coeffs = _null_space(np.stack(cols, axis=1), atol)
    mats = np.einsum("jc,jkl->ckl", coeffs, alg.basis)
    return OperatorAlgebra.span(list(mats), d, atol)


def fixed_points(
    ch: QuantumChannel, atol: float = DEFAULT_ATOL, cluster_tol: float = CLUSTER_TOL
) -> OperatorAlgebra:
    """Basis of ``{sigma : E(sigma) = sigma}``.

    Peripheral eigenvalues of a channel are semisimple, so the eigenvalue-1
    eigenspace is the null space of ``S - 1`` and is read off an SVD.
    """
    d = ch.dim
    s = superoperator(ch) - np.eye(d * d)
    ns = _null_space(s, cluster_tol)
    return OperatorAlgebra(d, ns.T.reshape(-1, d, d), is_algebra=False)


@dataclass(frozen=True, eq=False)
class AlgebraStructure:
    """Unitary block form ``U^dag A U = (+)_J M_{m_J} (x) 1_{n_J} (+) 0_kernel``.

    Columns of ``unitary`` are grouped block by block in the order of
    ``blocks``; inside block ``J`` column ``k * n_J + l`` carries the matrix
    index ``k`` and the multiplicity index ``l``. Kernel columns come last.
    For commutant structures (see :func:`noise_commutant_blocks`) the same
    column layout holds but the algebra acts as ``1_{m_J} (x) M_{n_J}``.
    """

    unitary: np.ndarray
    blocks: tuple[tuple[int, int], ...]
    kernel_dim: int
    residual: float
    orientation: str = "algebra"

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def block_columns(self, j: int) -> np.ndarray:
        start = sum(m * n for m, n in self.blocks[:j])
        m, n = self.blocks[j]
        return self.unitary[:, start : start + m * n]

    def to_dict(self) -> dict:
        from .serialization import matrix_to_json

        return {
            "blocks": [{"m": m, "n": n} for m, n in self.blocks],
            "kernel_dim": self.kernel_dim,
            "unitary": matrix_to_json(self.unitary),
            "residual": self.residual,
        }


def block_residual(
    basis: np.ndarray, unitary: np.ndarray, blocks, kernel_dim: int, orientation: str = "algebra"
) -> float:
    """Worst deviation of ``U^dag X U`` from the declared block pattern over ``basis``."""
    worst = 0.0
    for x in basis:
        t = dag(unitary) @ x @ unitary
        target = np.zeros_like(t)
        start = 0
        for m, n in blocks:
            sl = slice(start, start + m * n)
            blk = t[sl, sl].reshape(m, n, m, n)
            if orientation == "algebra":
                core = np.einsum("kili->kl", blk) / n
                target[sl, sl] = np.kron(core, np.eye(n))
            else:
                core = np.einsum("kikj->ij", blk) / m
                target[sl, sl] = np.kron(np.eye(m), core)
            start += m * n
        worst = max(worst, fro(t - target))
    return worst


def _random_hermitian(basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal(len(basis))
    h = np.einsum("j,jkl->kl", c, basis)
    c2 = rng.standard_normal(len(basis))
    h = h + 1j * np.einsum("j,jkl->kl", c2, basis)
    return (h + dag(h)) / 2


def _sort_key(columns: np.ndarray, m: int, n: int):
    proj = columns @ dag(columns)
    flat = np.concatenate([proj.real.ravel(), proj.imag.ravel()])
    return (-m, -n, tuple(-np.round(flat, 6)))


def _decompose_once(alg: OperatorAlgebra, atol: float, cluster_tol: float, rng) -> AlgebraStructure:
    stacked = np.vstack(list(alg.basis))
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    rank = int(np.sum(s > atol * max(1.0, s[0])))
    support = vh[:rank].conj().T
    kernel = vh[rank:].conj().T

    cen = center(alg, atol)
    z = _random_hermitian(cen.basis, rng)
    zs = dag(support) @ z @ support
    vals, vecs = np.linalg.eigh((zs + dag(zs)) / 2)
    groups = _cluster(vals, cluster_tol)
    if len(groups) != len(cen):
        raise DecompositionFailed(
            f"{len(groups)} eigenvalue clusters for a center of dimension {len(cen)}"
        )

    found = []
    for g in groups:
        vj = support @ vecs[:, g]
        dj = vj.shape[1]
        comp = np.stack([(dag(vj) @ x @ vj).ravel() for x in alg.basis], axis=1)
        comp_basis = _orth(comp, atol * max(1.0, float(np.max(np.abs(comp)))))
        r = comp_basis.shape[1]
        m = int(round(np.sqrt(r)))
        if r == 0 or m * m != r or dj % m:
            raise DecompositionFailed(f"block of dimension {dj} carries an algebra of dimension {r}")
        n = dj // m
        if m == 1:
            found.append((vj, 1, n))
            continue
        local = comp_basis.T.reshape(-1, dj, dj)
        h = _random_hermitian(local, rng)
        hv, he = np.linalg.eigh(h)
        sub = _cluster(hv, cluster_tol)
        if len(sub) != m or any(len(c) != n for c in sub):
            raise DecompositionFailed("minimal projections are not of equal rank")
        frames = [he[:, c] for c in sub]
        x = np.einsum("j,jkl->kl", rng.standard_normal(r) + 1j * rng.standard_normal(r), local)
        cols = [frames[0]]
        for fk in frames[1:]:
            y = dag(fk) @ x @ frames[0]
            p, sv, qh = np.linalg.svd(y)
            if sv[-1] <= cluster_tol * max(1.0, sv[0]) or sv[0] - sv[-1] > cluster_tol * sv[0] + atol:
                raise DecompositionFailed("no partial isometry between minimal projections")
            cols.append(fk @ (p @ qh))
        # column k*n + l  <->  matrix index k, multiplicity index l
        found.append((vj @ np.hstack(cols), m, n))

    found.sort(key=lambda item: _sort_key(item[0], item[1], item[2]))
    unitary = np.hstack([c for c, _, _ in found] + [kernel])
    blocks = tuple((m, n) for _, m, n in found)
    res = block_residual(alg.basis, unitary, blocks, kernel.shape[1])
    return AlgebraStructure(unitary, blocks, kernel.shape[1], res)


def decompose_structure(
    alg: OperatorAlgebra,
    atol: float = DEFAULT_ATOL,
    seed: int = 0,
    cluster_tol: float = CLUSTER_TOL,
) -> AlgebraStructure:
    """Block decomposition of a dagger-closed algebra.

    Blocks are sorted by ``m`` descending, then ``n`` descending, then by the
    block's support projection. Random elements are drawn from
    ``default_rng(seed + attempt)`` for up to ``MAX_RETRIES`` attempts.

    Raises
    ------
    DecompositionFailed
        No attempt produced a block pattern within ``10 * atol``.
    """
    last = None
    for attempt in range(MAX_RETRIES):
        rng = np.random.default_rng(seed + attempt)
        try:
            st = _decompose_once(alg, atol, cluster_tol, rng)
        except DecompositionFailed as exc:
            last = str(exc)
            continue
        if st.residual <= 10 * atol:
            return st
        last = f"block residual {st.residual:.3e}"
    raise DecompositionFailed(f"structure decomposition failed after {MAX_RETRIES} attempts: {last}")


def noise_commutant_blocks(
    ch: QuantumChannel, atol: float = DEFAULT_ATOL, seed: int = 0
) -> AlgebraStructure:
    """Block form ``A' = (+)_J 1_{m_J} (x) M_{n_J}`` of the noise commutant.

    ``blocks`` holds ``(m_J, n_J)`` with ``m_J`` the noisy and ``n_J`` the
    noiseless dimension. Inside block ``J`` column ``k * n_J + l`` is
    ``|alpha_k> (x) |beta_l>``, so the block's columns are directly an
    embedding for a subsystem decomposition.
    """
    alg = generate_interaction_algebra(ch, atol)
    comm = commutant(alg, atol)
    st = decompose_structure(comm, atol, seed=seed)
    cols, blocks = [], []
    for j, (p, q) in enumerate(st.blocks):
        # commutant block is M_p (x) 1_q: noiseless n = p, noisy m = q
        c = st.block_columns(j).reshape(st.dim, p, q).transpose(0, 2, 1).reshape(st.dim, p * q)
        cols.append((c, q, p))
    cols.sort(key=lambda item: _sort_key(item[0], item[1], item[2]))
    unitary = np.hstack([c for c, _, _ in cols])
    blocks = tuple((m, n) for _, m, n in cols)
    res = block_residual(comm.basis, unitary, blocks, 0, orientation="commutant")
    return AlgebraStructure(unitary, blocks, 0, res, orientation="commutant")
