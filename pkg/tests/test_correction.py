import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oqec.correction import (
    build_standard_recovery,
    check_correctable_triple,
    check_standard_condition,
    check_unified_condition,
    convert_to_standard,
    mix_kraus,
    rotate_decomposition,
    theorem2_necessity_audit,
    transform_lambda,
)
from oqec.errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotCorrectable,
    NotIsometry,
    NotProjector,
    NotUnitary,
    NotVerified,
)
from oqec.matrix_core import (
    compose,
    random_channel,
    random_isometry,
    random_pure_state,
    random_unitary,
    validate_channel,
)
from oqec.subsystems import check_theorem1, code_decomposition
from oqec.zoo import bit_flip, fixture, random_decomposition, random_ns_channel

ATOL = 1e-8


def identity(d):
    return validate_channel([np.eye(d)])


def worst_recovery_error(channel, sector, n_states, seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        psi = sector @ random_pure_state(sector.shape[1], rng)
        rho = np.outer(psi, psi.conj())
        out = channel(rho)
        worst = max(worst, np.linalg.norm(out / np.trace(out).real - rho))
    return worst


def test_bit_flip_code_lambda_matches_direct_compression():
    fx = fixture("bit_flip_code", p=0.05)
    ok, lam = check_standard_condition(fx.channel, fx.projector)
    assert ok
    # oracle: compress each E_a^dag E_b onto |000>, read off the coefficient
    k = fx.channel.kraus
    direct = np.array([[(k[a].conj().T @ k[b])[0, 0] for b in range(4)] for a in range(4)])
    assert np.allclose(direct, np.diag([0.85, 0.05, 0.05, 0.05]), atol=1e-12)
    assert np.max(np.abs(lam.values - direct)) <= 1e-10


def test_bit_flip_code_recovery():
    fx = fixture("bit_flip_code", p=0.05)
    rec = build_standard_recovery(fx.channel, fx.projector)
    err = worst_recovery_error(compose(rec, fx.channel), fx.decomposition.embedding, 100, 0)
    assert err <= 1e-8


def test_unencoded_qubit_is_not_correctable():
    # E_0^dag E_1 = 0.3 X is not proportional to the identity
    ok, lam = check_standard_condition(bit_flip(0.1), np.eye(2))
    assert not ok
    assert lam.max_residual == pytest.approx(0.3 * np.sqrt(2))
    with pytest.raises(NotCorrectable):
        build_standard_recovery(bit_flip(0.1), np.eye(2))


def test_identity_code_is_correctable_with_trivial_recovery():
    fx = fixture("identity", d=3)
    ok, lam = check_standard_condition(fx.channel, fx.projector)
    assert ok and np.allclose(lam.values, [[1]])


def test_bad_projector():
    with pytest.raises(NotProjector):
        check_standard_condition(bit_flip(0.1), np.array([[1, 1], [0, 0]]))
    with pytest.raises(NotProjector):
        check_standard_condition(bit_flip(0.1), np.zeros((2, 2)))
    with pytest.raises(DimensionMismatch):
        check_standard_condition(bit_flip(0.1), np.eye(3))


def test_unified_condition_on_fixtures():
    ok, lam = check_unified_condition(fixture("damping_on_A").channel, fixture("damping_on_A").units)
    assert ok and lam.values.shape == (2, 2, 2, 2)
    # lambda_ab00 = <0| A_a^dag A_b |0>
    assert np.isclose(lam.values[0, 0, 0, 0], 1)
    assert np.isclose(lam.values[1, 1, 1, 1], 0.3)
    ok, lam = check_unified_condition(fixture("damping_on_B").channel, fixture("damping_on_B").units)
    assert not ok and lam.max_residual > 0.1


def test_triple_identity_recovery_on_ns_channel():
    fx = fixture("damping_on_A")
    triple = check_correctable_triple(identity(4), fx.channel, fx.decomposition, fx.units)
    assert triple.verified and triple.residual <= ATOL


def test_triple_fails_for_damping_on_b():
    fx = fixture("damping_on_B")
    triple = check_correctable_triple(identity(4), fx.channel, fx.decomposition, fx.units)
    assert not triple.verified


def test_triple_with_unitary_undoing_noise():
    decomp, mu = random_decomposition(6, 2, 2, seed=3)
    ns = random_ns_channel(decomp, seed=4)
    u = random_unitary(6, np.random.default_rng(5))
    noise = compose(validate_channel([u.conj().T]), ns)
    triple = check_correctable_triple(validate_channel([u]), noise, decomp, mu)
    assert triple.verified


def test_convert_damping_on_a():
    fx = fixture("damping_on_A", gamma=0.3)
    triple = check_correctable_triple(identity(4), fx.channel, fx.decomposition, fx.units)
    for k in range(2):
        rec, p_k = convert_to_standard(triple, k)
        assert np.allclose(p_k, fx.units.units[k, k])
        ok, lam = check_standard_condition(fx.channel, p_k)
        assert ok and lam.max_residual <= 1e-7
        sector, _ = code_decomposition(p_k)
        err = worst_recovery_error(compose(rec, fx.channel), sector.embedding, 50, k)
        assert err <= 1e-8


def test_convert_errors():
    fx = fixture("damping_on_B")
    bad = check_correctable_triple(identity(4), fx.channel, fx.decomposition, fx.units)
    with pytest.raises(NotVerified):
        convert_to_standard(bad, 0)
    fx = fixture("damping_on_A")
    good = check_correctable_triple(identity(4), fx.channel, fx.decomposition, fx.units)
    with pytest.raises(IndexOutOfRange):
        convert_to_standard(good, 2)
    with pytest.raises(IndexOutOfRange):
        convert_to_standard(good, -1)


def test_transform_lambda_hadamard_on_kraus():
    fx = fixture("damping_on_A")
    _, lam = check_unified_condition(fx.channel, fx.units)
    w = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    f = mix_kraus(fx.channel, w)
    _, direct = check_unified_condition(f, fx.units)
    assert np.allclose(transform_lambda(lam, np.eye(2), w).values, direct.values, atol=1e-12)


def test_transform_lambda_rejects_non_unitary():
    _, lam = check_unified_condition(fixture("damping_on_A").channel, fixture("damping_on_A").units)
    with pytest.raises(NotUnitary):
        transform_lambda(lam, 2 * np.eye(2), np.eye(2))
    with pytest.raises(NotIsometry):
        transform_lambda(lam, np.eye(2), 2 * np.eye(2))


def test_necessity_audit():
    fx = fixture("damping_on_A")
    rep = theorem2_necessity_audit(fx.channel, identity(4), fx.decomposition, fx.units)
    assert rep.triple_correctable and rep.eq8_holds and not rep.violation
    fx = fixture("damping_on_B")
    rep = theorem2_necessity_audit(fx.channel, identity(4), fx.decomposition, fx.units)
    assert not rep.triple_correctable and not rep.eq8_holds and not rep.violation


# properties

seeds = st.integers(0, 10**6)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_covariance_under_representation_change(seed, m, n):
    decomp, mu = random_decomposition(6, m, n, seed)
    ch = random_ns_channel(decomp, seed + 1)
    ok, lam = check_unified_condition(ch, mu)
    assert ok
    rng = np.random.default_rng(seed + 2)
    u = random_unitary(m, rng)
    w = random_unitary(len(ch), rng)
    decomp2, mu2 = rotate_decomposition(decomp, u)
    ok2, lam2 = check_unified_condition(mix_kraus(ch, w), mu2)
    assert ok2
    assert np.max(np.abs(transform_lambda(lam, u, w).values - lam2.values)) <= 1e-7


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([4, 6]), st.integers(1, 2), st.integers(1, 2))
def test_random_recoveries_never_violate_necessity(seed, d, m, n):
    decomp, mu = random_decomposition(d, m, n, seed)
    ns = random_ns_channel(decomp, seed + 1)
    for r in (random_channel(d, 2, seed + 2), identity(d)):
        for noise in (ns, random_channel(d, 2, seed + 3)):
            assert not theorem2_necessity_audit(noise, r, decomp, mu).violation


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_standard_recovery_on_rotated_flip_codes(seed):
    u = random_unitary(8, np.random.default_rng(seed))
    fx = fixture("random_unitary_conjugate", base="bit_flip_code", seed=seed, p=0.05)
    rec = build_standard_recovery(fx.channel, fx.projector)
    assert worst_recovery_error(compose(rec, fx.channel), fx.decomposition.embedding, 10, seed) <= 1e-8
    assert np.allclose(fx.projector, u @ fixture("bit_flip_code").projector @ u.conj().T)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_unified_condition_implies_standard_on_each_sector(seed, m, n):
    decomp, mu = random_decomposition(6, m, n, seed)
    ch = random_ns_channel(decomp, seed + 1)
    ok1, _ = check_theorem1(ch, mu)
    assert ok1
    for k in range(m):
        assert check_standard_condition(ch, mu.units[k, k])[0]


def test_single_kraus_isometry_mixing():
    # padding the Kraus family with zeros is an isometric mixing
    fx = fixture("damping_on_A")
    _, lam = check_unified_condition(fx.channel, fx.units)
    w = random_isometry(3, 2, np.random.default_rng(0))
    f = validate_channel(list(np.einsum("ab,bij->aij", w, fx.channel.stack)))
    _, direct = check_unified_condition(f, fx.units)
    assert np.allclose(transform_lambda(lam, np.eye(2), w).values, direct.values, atol=1e-12)
