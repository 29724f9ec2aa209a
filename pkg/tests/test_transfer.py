from hypothesis import given, strategies as st
import numpy as np
import pytest

from mpsberry.errors import DimensionError
from mpsberry.mps import canonicalize, random_tensor
from mpsberry.transfer import (TransferMap, apply_transfer, fix_phase, leading_eigenpair, spectrum,
                               subleading_modulus)
from mpsberry.model import analytic_mps

import oracles

seeds = st.integers(0, 2 ** 31 - 1)
dims = st.integers(1, 5)


def _pair(seed, d, d0, d1):
    r = np.random.default_rng(seed)
    a0 = r.standard_normal((d, d0, d0)) + 1j * r.standard_normal((d, d0, d0))
    a1 = r.standard_normal((d, d1, d1)) + 1j * r.standard_normal((d, d1, d1))
    return a0, a1


def test_scalar_identity_map():
    assert apply_transfer(TransferMap(np.ones((1, 1, 1)), np.ones((1, 1, 1))), np.ones((1, 1))) == 1


def test_right_canonical_maps_identity_to_identity():
    mps = canonicalize(random_tensor(2, 4, 3))
    out = apply_transfer(TransferMap(mps.tensor, mps.tensor), np.eye(4))
    assert np.max(np.abs(out - np.eye(4))) < 1e-12


def test_matches_dense_vectorization(rng):
    a0, a1 = _pair(7, 2, 3, 3)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    want = (oracles.transfer_matrix(a0, a1) @ x.reshape(-1)).reshape(3, 3)
    assert np.allclose(apply_transfer(TransferMap(a0, a1), x), want, atol=1e-13)


def test_shape_mismatch_raises():
    a0, a1 = _pair(1, 2, 3, 2)
    with pytest.raises(DimensionError):
        apply_transfer(TransferMap(a0, a1), np.zeros((3, 3)))
    with pytest.raises(DimensionError):
        TransferMap(np.zeros((2, 2, 2)), np.zeros((3, 2, 2)))


@given(seeds, st.integers(1, 3), dims, dims)
def test_linearity(seed, d, d0, d1):
    a0, a1 = _pair(seed, d, d0, d1)
    r = np.random.default_rng(seed + 1)
    x, y = (r.standard_normal((d0, d1)) + 1j * r.standard_normal((d0, d1)) for _ in range(2))
    a, b = 0.3 - 1.2j, 2.1 + 0.4j
    t = TransferMap(a0, a1)
    lhs = t(a * x + b * y)
    assert np.allclose(lhs, a * t(x) + b * t(y), atol=1e-12 * (1 + np.abs(lhs).max()))


@given(seeds, st.integers(1, 3), dims, dims)
def test_adjoint_consistency(seed, d, d0, d1):
    a0, a1 = _pair(seed, d, d0, d1)
    r = np.random.default_rng(seed + 2)
    x, y = (r.standard_normal((d0, d1)) + 1j * r.standard_normal((d0, d1)) for _ in range(2))
    t = TransferMap(a0, a1)
    lhs = np.vdot(y, t(x))
    rhs = np.vdot(t.dagger()(y), x)
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))


def test_canonical_leading_pair_is_normalized_identity():
    mps = canonicalize(random_tensor(2, 3, 5))
    res = leading_eigenpair(TransferMap(mps.tensor, mps.tensor))
    assert abs(res.eta - 1) < 1e-12
    assert np.allclose(res.vec, np.eye(3) / np.sqrt(3), atol=1e-10)


@pytest.mark.parametrize("dense_max", [0, 64])
def test_random_d2_D4_matches_dense_eigendecomposition(dense_max):
    a = random_tensor(2, 4, 11)
    res = leading_eigenpair(TransferMap(a, a), dense_max=dense_max)
    eta, vec, _ = oracles.dense_leading(a, a)
    assert abs(res.eta - eta) < 1e-10 * abs(eta)
    assert np.max(np.abs(res.vec - oracles.phase_fixed(vec))) < 1e-8
    assert res.residual <= 1e-10 * abs(res.eta)


def test_gauge_equivalent_pair_has_unit_modulus_and_gauge_vector(rng):
    mps = canonicalize(random_tensor(2, 3, 4))
    w, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    theta = 0.7
    a0 = np.exp(1j * theta) * np.einsum("ab,ibc,cd->iad", w, mps.tensor, w.conj().T)
    res = leading_eigenpair(TransferMap(a0, mps.tensor), dense_max=0)
    assert abs(abs(res.eta) - 1) < 1e-10
    assert abs(np.angle(res.eta) - theta) < 1e-10
    overlap = abs(np.vdot(w, res.vec)) / np.linalg.norm(w)
    assert abs(overlap - 1) < 1e-10


def test_gauge_pair_spectrum_is_rotated_self_spectrum(rng):
    mps = canonicalize(random_tensor(2, 3, 8))
    w, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    theta = -1.1
    a0 = np.exp(1j * theta) * np.einsum("ab,ibc,cd->iad", w, mps.tensor, w.conj().T)
    mixed = np.linalg.eigvals(oracles.transfer_matrix(a0, mps.tensor))
    self_ = np.linalg.eigvals(oracles.transfer_matrix(mps.tensor, mps.tensor))
    rotated = self_ * np.exp(1j * theta)
    dist = max(np.min(np.abs(rotated - z)) for z in mixed)
    assert dist < 1e-10


def test_fix_phase_ties_lowest_index():
    v = np.array([1j, -1j, 0.5])
    out = fix_phase(v)
    assert out[0] == pytest.approx(1.0)
    assert out[1] == pytest.approx(-1.0)


def test_subleading_product_state_is_zero():
    a = np.array([0, 1, 0, 0], dtype=complex).reshape(4, 1, 1)
    assert subleading_modulus(TransferMap(a, a)) == 0.0


def test_subleading_bell_pairs_matches_dense():
    mps = analytic_mps(np.pi / 4)
    _, _, moduli = oracles.dense_leading(mps.tensor, mps.tensor)
    assert abs(subleading_modulus(TransferMap(mps.tensor, mps.tensor)) - moduli[1]) < 1e-12


@given(seeds)
def test_subleading_bounded_by_leading(seed):
    a = random_tensor(2, 3, seed)
    t = TransferMap(a, a)
    w, _ = spectrum(t, k=2)
    assert abs(w[1]) <= abs(w[0]) * (1 + 1e-12)
    assert subleading_modulus(t) <= abs(w[0]) * (1 + 1e-12)


def test_real_map_stays_real():
    a = np.random.default_rng(3).standard_normal((2, 9, 9))
    res = leading_eigenpair(TransferMap(a, a), dense_max=0)
    eta, _, _ = oracles.dense_leading(a, a)
    assert abs(res.eta - eta) < 1e-10 * abs(eta)


def test_nilpotent_remainder_is_polished():
    """Zero-correlation-length states have a defective zero block; the leading
    eigenvector must still come back at round-off."""
    a = np.asarray(oracles.bond_singlet_tensor(0.1))
    r = np.random.default_rng(0)
    q, _ = np.linalg.qr(r.standard_normal((2, 2)) + 1j * r.standard_normal((2, 2)))
    a = np.einsum("ab,ibc,cd->iad", q, a, q.conj().T)
    for adjoint in (False, True):
        res = leading_eigenpair(TransferMap(a, a, adjoint=adjoint))
        assert res.residual < 1e-13
