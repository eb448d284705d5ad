"""Named channels, codes and decompositions used by tests, docs and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, UnknownFixture
from .matrix_core import (
    QuantumChannel,
    dag,
    random_channel,
    random_isometry,
    random_unitary,
    validate_channel,
)
from .subsystems import (
    MatrixUnitFamily,
    SubsystemDecomposition,
    build_decomposition,
    code_decomposition,
    product_decomposition,
)

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)


def kron(*ops) -> np.ndarray:
    out = np.eye(1, dtype=np.complex128)
    for o in ops:
        out = np.kron(out, o)
    return out


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=np.complex128)
    v[int(bits, 2)] = 1
    return v


def single_qubit_op(op, site: int, n_qubits: int) -> np.ndarray:
    return kron(*[op if i == site else I2 for i in range(n_qubits)])


def bit_flip(p: float) -> QuantumChannel:
    return validate_channel([np.sqrt(1 - p) * I2, np.sqrt(p) * X], label=f"bit_flip({p})")


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    a0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=np.complex128)
    a1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=np.complex128)
    return [a0, a1]


def amplitude_damping(gamma: float) -> QuantumChannel:
    return validate_channel(amplitude_damping_kraus(gamma), label=f"amplitude_damping({gamma})")


def depolarizing() -> QuantumChannel:
    """Fully depolarising qubit channel written with the four Paulis."""
    return validate_channel([p / 2 for p in (I2, X, Y, Z)], label="depolarizing")


def three_qubit_flip_errors(op: np.ndarray, p: float) -> list[np.ndarray]:
    return [np.sqrt(1 - 3 * p) * np.eye(8)] + [np.sqrt(p) * single_qubit_op(op, i, 3) for i in range(3)]


def spin_half_sector_embedding() -> np.ndarray:
    """Columns ``|j=1/2, m_z> (x) |lambda>`` spanning the spin-1/2 sector of three qubits.

    ``m_z`` (spin projection, the noisy index) is the major index and the
    multiplicity label ``lambda`` the minor one. The ``m_z = -1/2`` states
    are obtained by applying the collective lowering operator, so collective
    unitaries act identically on both multiplicity copies.
    """
    lower = sum(single_qubit_op(SIGMA_MINUS, i, 3) for i in range(3))
    up0 = (ket("010") - ket("100")) / np.sqrt(2)
    up1 = (2 * ket("001") - ket("010") - ket("100")) / np.sqrt(6)
    down0, down1 = lower @ up0, lower @ up1
    return np.stack([up0, up1, down0, down1], axis=1)


def random_decomposition(dim: int, m: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    return build_decomposition(random_isometry(dim, m * n, rng), m, n)


def random_ns_channel(
    decomp: SubsystemDecomposition, seed: int, n_kraus: int = 2, n_leak: int = 2
) -> QuantumChannel:
    """Random channel for which ``decomp`` carries a (generalised) noiseless subsystem.

    On the protected sector the channel is ``T (x) id`` with a random ``T``;
    ``K`` is sent anywhere by a random isometry, and the whole family is then
    mixed by a random unitary so no Kraus operator is block structured.
    """
    rng = np.random.default_rng(seed)
    d, m, n, v = decomp.dim, decomp.m, decomp.n, decomp.embedding
    t = random_channel(m, n_kraus, int(rng.integers(2**31)))
    ops = [v @ np.kron(ta, np.eye(n)) @ dag(v) for ta in t.kraus]
    kdim = d - m * n
    if kdim:
        kb = np.linalg.svd(np.eye(d) - v @ dag(v))[0][:, :kdim]
        w = random_isometry(d * n_leak, kdim, rng)
        ops += [w[b * d : (b + 1) * d] @ dag(kb) for b in range(n_leak)]
    mix = random_unitary(len(ops), rng)
    ops = list(np.einsum("ab,bij->aij", mix, np.stack(ops)))
    return validate_channel(ops, label=f"random_ns_channel(seed={seed})")


def random_mixed_unitary_channel(
    dim: int, n_unitaries: int, seed: int, structure: str = "generic"
) -> QuantumChannel:
    """Uniform mixture of seeded random unitaries; unital by construction.

    ``structure`` restricts the unitaries: ``"generic"`` (Haar on ``U(d)``),
    ``"blocks"`` (block diagonal, first block of size ``d // 2``) or
    ``"ampliated"`` (``u (x) 1_2``, needs even ``d``).
    """
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(n_unitaries):
        if structure == "generic":
            u = random_unitary(dim, rng)
        elif structure == "blocks":
            h = max(1, dim // 2)
            u = np.zeros((dim, dim), dtype=np.complex128)
            u[:h, :h] = random_unitary(h, rng)
            u[h:, h:] = random_unitary(dim - h, rng)
        elif structure == "ampliated":
            if dim % 2:
                raise BadParams("ampliated structure needs an even dimension")
            u = np.kron(random_unitary(dim // 2, rng), I2)
        else:
            raise BadParams(f"unknown structure {structure!r}")
        ops.append(u / np.sqrt(n_unitaries))
    return validate_channel(ops, label=f"mixed_unitary(d={dim}, {structure}, seed={seed})")


def conjugate_channel(ch: QuantumChannel, u: np.ndarray, label: str = "") -> QuantumChannel:
    return validate_channel([u @ k @ dag(u) for k in ch.kraus], label=label or ch.label)


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    channel: QuantumChannel
    decomposition: SubsystemDecomposition
    units: MatrixUnitFamily
    expected: dict[str, bool]
    projector: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    @property
    def code(self):
        """The projector for standard codes, otherwise the decomposition."""
        return self.projector if self.projector is not None else self.decomposition


def _identity(d: int = 2) -> Fixture:
    ch = validate_channel([np.eye(d)], label=f"identity({d})")
    decomp, mu = product_decomposition(1, d)
    exp = dict(unital=True, ns=True, theorem1=True, eq8=True, eq2=True)
    return Fixture("identity", ch, decomp, mu, exp, np.eye(d, dtype=np.complex128))


def _flip_code(name: str, op: np.ndarray, logical: tuple[np.ndarray, np.ndarray], p: float) -> Fixture:
    if not 0 <= p <= 1 / 3:
        raise BadParams("p must lie in [0, 1/3]")
    ch = validate_channel(three_qubit_flip_errors(op, p), label=f"{name}({p})")
    proj = sum(np.outer(v, v.conj()) for v in logical)
    decomp, mu = code_decomposition(proj)
    exp = dict(unital=True, ns=p == 0, theorem1=p == 0, eq8=True, eq2=True)
    return Fixture(name, ch, decomp, mu, exp, proj)


def _bit_flip_code(p: float = 0.05) -> Fixture:
    return _flip_code("bit_flip_code", X, (ket("000"), ket("111")), p)


def _phase_flip_code(p: float = 0.05) -> Fixture:
    plus = kron(*[np.array([1, 1]) / np.sqrt(2)] * 3)
    minus = kron(*[np.array([1, -1]) / np.sqrt(2)] * 3)
    return _flip_code("phase_flip_code", Z, (plus, minus), p)


def _amplitude_damping(gamma: float = 0.3) -> Fixture:
    ch = amplitude_damping(gamma)
    decomp, mu = product_decomposition(2, 1)
    exp = dict(unital=gamma == 0, ns=True, theorem1=True, eq8=True)
    return Fixture("amplitude_damping", ch, decomp, mu, exp)


def _damping_on(side: str, gamma: float) -> Fixture:
    if not 0 <= gamma <= 1:
        raise BadParams("gamma must lie in [0, 1]")
    if side == "A":
        ops = [np.kron(a, I2) for a in amplitude_damping_kraus(gamma)]
    else:
        ops = [np.kron(I2, a) for a in amplitude_damping_kraus(gamma)]
    ch = validate_channel(ops, label=f"damping_on_{side}({gamma})")
    decomp, mu = product_decomposition(2, 2)
    good = side == "A" or gamma == 0
    exp = dict(unital=gamma == 0, ns=good, theorem1=good, eq8=good)
    return Fixture(f"damping_on_{side}", ch, decomp, mu, exp)


def _collective_unitary(n_qubits: int = 3, n_samples: int = 4, seed: int | None = None) -> Fixture:
    if seed is None:
        raise BadParams("collective_unitary needs an explicit seed")
    if n_samples < 1:
        raise BadParams("n_samples must be positive")
    rng = np.random.default_rng(seed)
    us = [random_unitary(2, rng) for _ in range(n_samples)]
    ch = validate_channel(
        [kron(*[u] * n_qubits) / np.sqrt(n_samples) for u in us],
        label=f"collective_unitary({n_qubits}, {n_samples}, seed={seed})",
    )
    if n_qubits == 3:
        decomp, mu = build_decomposition(spin_half_sector_embedding(), 2, 2)
    else:
        from .subsystems import find_noiseless_subsystems

        found = find_noiseless_subsystems(ch, seed=seed)
        best = max(found, key=lambda s: (s.decomposition.n, s.decomposition.m))
        decomp, mu = best.decomposition, best.units
    exp = dict(unital=True, ns=True, theorem1=True, eq8=True)
    return Fixture("collective_unitary", ch, decomp, mu, exp)


def _collective_dephasing_dfs(n_samples: int = 3, seed: int = 0) -> Fixture:
    rng = np.random.default_rng(seed)
    zz = np.diag(kron(Z, I2) + kron(I2, Z)).real
    thetas = rng.uniform(0, 2 * np.pi, n_samples)
    ops = [np.diag(np.exp(-0.5j * t * zz)) / np.sqrt(n_samples) for t in thetas]
    ch = validate_channel(ops, label=f"collective_dephasing({n_samples}, seed={seed})")
    proj = np.outer(ket("01"), ket("01")) + np.outer(ket("10"), ket("10"))
    decomp, mu = code_decomposition(proj)
    exp = dict(unital=True, ns=True, theorem1=True, eq8=True, eq2=True)
    return Fixture("collective_dephasing_dfs", ch, decomp, mu, exp, proj.astype(np.complex128))


def _leaky_ns_channel(gamma: float = 0.3) -> Fixture:
    """Damping on ``H^A`` plus a Kraus operator sending ``K`` into the sector.

    ``H = (C^2 (x) C^2) (+) K`` with ``K`` one-dimensional (index 4). The leak
    ``|alpha_0 beta_0><K|`` makes ``P E P_perp`` nonzero, so the protected
    operators are not in the commutant of the interaction algebra, yet
    nothing leaves the sector and the sector sees ``D_gamma (x) id``.
    """
    ops = []
    for a in amplitude_damping_kraus(gamma):
        e = np.zeros((5, 5), dtype=np.complex128)
        e[:4, :4] = np.kron(a, I2)
        ops.append(e)
    leak = np.zeros((5, 5), dtype=np.complex128)
    leak[0, 4] = 1
    ops.append(leak)
    ch = validate_channel(ops, label=f"leaky_ns_channel({gamma})")
    decomp, mu = product_decomposition(2, 2, k_dim=1)
    exp = dict(unital=False, ns=True, theorem1=True, eq8=True)
    return Fixture("leaky_ns_channel", ch, decomp, mu, exp)


def _random_unitary_conjugate(base: str = "bit_flip_code", seed: int = 0, **base_params) -> Fixture:
    if base == "random_unitary_conjugate":
        raise BadParams("base fixture cannot itself be random_unitary_conjugate")
    fx = fixture(base, **base_params)
    u = random_unitary(fx.channel.dim, np.random.default_rng(seed))
    ch = conjugate_channel(fx.channel, u, label=f"conj[{seed}]({fx.channel.label})")
    decomp, mu = build_decomposition(u @ fx.decomposition.embedding, fx.decomposition.m, fx.decomposition.n)
    proj = None if fx.projector is None else u @ fx.projector @ dag(u)
    return Fixture("random_unitary_conjugate", ch, decomp, mu, dict(fx.expected), proj)


_FIXTURES = {
    "identity": _identity,
    "bit_flip_code": _bit_flip_code,
    "phase_flip_code": _phase_flip_code,
    "amplitude_damping": _amplitude_damping,
    "damping_on_A": lambda gamma=0.3: _damping_on("A", gamma),
    "damping_on_B": lambda gamma=0.3: _damping_on("B", gamma),
    "collective_unitary": _collective_unitary,
    "collective_dephasing_dfs": _collective_dephasing_dfs,
    "leaky_ns_channel": _leaky_ns_channel,
    "random_unitary_conjugate": _random_unitary_conjugate,
}

FIXTURE_NAMES = tuple(_FIXTURES)


def fixture(name: str, **params) -> Fixture:
    """Build a named fixture. Deterministic in ``(name, params)``."""
    try:
        build = _FIXTURES[name]
    except KeyError:
        raise UnknownFixture(name) from None
    try:
        fx = build(**params)
    except TypeError as exc:
        raise BadParams(f"{name}: {exc}") from None
    object.__setattr__(fx, "params", dict(params))
    return fx


def default_fixtures() -> list[Fixture]:
    """One instance of every fixture with default parameters."""
    return [
        fixture("identity", d=2),
        fixture("identity", d=4),
        fixture("bit_flip_code", p=0.05),
        fixture("phase_flip_code", p=0.05),
        fixture("amplitude_damping", gamma=0.3),
        fixture("damping_on_A", gamma=0.3),
        fixture("damping_on_B", gamma=0.3),
        fixture("collective_unitary", n_qubits=3, n_samples=4, seed=7),
        fixture("collective_dephasing_dfs"),
        fixture("leaky_ns_channel", gamma=0.3),
        fixture("random_unitary_conjugate", base="bit_flip_code", seed=1),
        fixture("random_unitary_conjugate", base="damping_on_A", seed=2),
        fixture("random_unitary_conjugate", base="leaky_ns_channel", seed=3),
    ]
