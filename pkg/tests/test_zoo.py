import numpy as np
import pytest

from oqec.correction import check_standard_condition, check_unified_condition
from oqec.errors import BadParams, UnknownFixture
from oqec.matrix_core import is_unital
from oqec.subsystems import check_ns, check_theorem1
from oqec.zoo import (
    SIGMA_MINUS,
    FIXTURE_NAMES,
    default_fixtures,
    fixture,
    ket,
    random_mixed_unitary_channel,
    single_qubit_op,
    spin_half_sector_embedding,
)

FIXTURES = default_fixtures()


def _id(fx):
    return f"{fx.name}-{fx.channel.label}"


@pytest.mark.parametrize("fx", FIXTURES, ids=_id)
def test_expected_verdicts(fx):
    exp = fx.expected
    assert is_unital(fx.channel) == exp["unital"]
    assert check_ns(fx.channel, fx.decomposition).ok == exp["ns"]
    assert check_theorem1(fx.channel, fx.units)[0] == exp["theorem1"]
    assert check_unified_condition(fx.channel, fx.units)[0] == exp["eq8"]
    if fx.projector is not None:
        assert check_standard_condition(fx.channel, fx.projector)[0] == exp["eq2"]


def test_every_fixture_has_a_default_instance():
    assert {fx.name for fx in FIXTURES} == set(FIXTURE_NAMES)


@pytest.mark.parametrize("fx", FIXTURES, ids=_id)
def test_fixtures_are_deterministic(fx):
    again = fixture(fx.name, **fx.params)
    assert all(np.array_equal(a, b) for a, b in zip(fx.channel.kraus, again.channel.kraus))
    assert np.array_equal(fx.decomposition.embedding, again.decomposition.embedding)


def test_unknown_fixture():
    with pytest.raises(UnknownFixture):
        fixture("steane_code")


@pytest.mark.parametrize(
    "name, params",
    [
        ("bit_flip_code", {"p": 0.5}),
        ("damping_on_A", {"gamma": 1.5}),
        ("collective_unitary", {}),
        ("collective_unitary", {"seed": 0, "n_samples": 0}),
        ("identity", {"colour": "red"}),
        ("random_unitary_conjugate", {"base": "random_unitary_conjugate"}),
    ],
)
def test_bad_params(name, params):
    with pytest.raises(BadParams):
        fixture(name, **params)


def test_zero_noise_flip_code_is_noiseless():
    fx = fixture("bit_flip_code", p=0.0)
    assert fx.expected["ns"]
    assert check_ns(fx.channel, fx.decomposition).ok


def test_collective_dephasing_leaves_dfs_invariant():
    fx = fixture("collective_dephasing_dfs", n_samples=5, seed=2)
    for k in fx.channel.kraus:
        # Z (x) 1 + 1 (x) Z vanishes on |01> and |10>
        assert np.allclose(k @ ket("01"), k[1, 1] * ket("01"))
        assert np.isclose(k[1, 1], k[2, 2])


def test_spin_half_sector_is_orthonormal_and_killed_by_total_raising():
    v = spin_half_sector_embedding()
    assert np.allclose(v.conj().T @ v, np.eye(4))
    # up states carry total S_z = +1/2, down states -1/2
    sz = np.diag([sum(0.5 - int(b) for b in f"{i:03b}") for i in range(8)])
    assert np.allclose(v[:, :2].conj().T @ sz @ v[:, :2], 0.5 * np.eye(2))
    assert np.allclose(v[:, 2:].conj().T @ sz @ v[:, 2:], -0.5 * np.eye(2))
    raising = sum(single_qubit_op(SIGMA_MINUS.T, i, 3) for i in range(3))
    assert np.allclose(raising @ v[:, :2], 0)


@pytest.mark.parametrize("structure", ["generic", "blocks", "ampliated"])
def test_mixed_unitary_channels_are_unital(structure):
    assert is_unital(random_mixed_unitary_channel(4, 3, 0, structure))


def test_mixed_unitary_bad_structure():
    with pytest.raises(BadParams):
        random_mixed_unitary_channel(3, 2, 0, "ampliated")
    with pytest.raises(BadParams):
        random_mixed_unitary_channel(4, 2, 0, "sparse")


def test_conjugated_fixture_keeps_expectations():
    fx = fixture("random_unitary_conjugate", base="damping_on_B", seed=5)
    assert fx.expected == fixture("damping_on_B").expected
    assert not check_ns(fx.channel, fx.decomposition).ok
