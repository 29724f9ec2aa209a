import math

import numpy as np
import pytest

from mpsberry.errors import ConfigError, SolverError, SymmetrizationError
from mpsberry.model import ModelPoint, analytic_mps, hamiltonian, two_site_ground_energy
from mpsberry.mps import CanonicalMps, left_canonical_residual, right_canonical_residual
from mpsberry.solver import (SolverOptions, _Cell, _to_one_site, energy_density, ground_state,
                             solve_point, svd, with_schedule)
from mpsberry.transfer import TransferMap, leading_eigenpair

import oracles


def _h(alpha, j1=0.0, j2=0.0):
    return hamiltonian(ModelPoint(alpha, 0.0, 0.0, j1, j2))


@pytest.fixture(scope="module")
def solved():
    cache = {}

    def get(alpha, j1=0.0, j2=0.0):
        if (alpha, j1, j2) not in cache:
            cache[(alpha, j1, j2)] = ground_state(_h(alpha, j1, j2), return_trace=True)
        return cache[(alpha, j1, j2)]

    return get


@pytest.mark.parametrize("alpha", [-math.pi / 4, -0.3, 0.0])
def test_negative_side_is_a_product_state(solved, alpha):
    mps, _ = solved(alpha)
    assert mps.bond_dim == 1
    assert energy_density(mps, _h(alpha)) == pytest.approx(
        two_site_ground_energy(ModelPoint(alpha, 0, 0)), abs=1e-6)


@pytest.mark.parametrize("alpha", [math.pi / 8, 0.3, math.pi / 4])
def test_positive_side_matches_analytic_state(solved, alpha):
    mps, _ = solved(alpha)
    fid = abs(leading_eigenpair(TransferMap(mps.tensor, analytic_mps(alpha).tensor)).eta)
    assert fid >= 1 - 1e-6
    assert energy_density(mps, _h(alpha)) == pytest.approx(
        oracles.two_spin_field_energy(alpha, True), abs=1e-6)


def test_energy_density_of_analytic_states():
    for alpha, want in ((-math.pi / 4, -3.0), (0.0, -2.0), (math.pi / 4, -3.0)):
        assert energy_density(analytic_mps(alpha), _h(alpha)) == pytest.approx(want, abs=1e-12)


def test_output_is_canonical(solved):
    mps, _ = solved(0.3)
    assert right_canonical_residual(mps.tensor) < 1e-12
    assert left_canonical_residual(mps.tensor, mps.schmidt) < 1e-12
    assert mps.meta["sublattice_fidelity"] >= 1 - 1e-8


def test_stage_energies_do_not_increase(solved):
    _, trace = solved(0.3)
    e = trace.stage_energies
    assert all(b <= a + 1e-9 for a, b in zip(e, e[1:]))
    assert trace.n_sweeps == len(trace.rows) > 0
    assert "dtau=" in str(trace)


@pytest.mark.slow
def test_symmetric_start_in_other_phase_converges(solved):
    """Regression: the on-site singlet start used to end on a non-injective state here."""
    mps, _ = solved(math.pi / 4, 0.2, 0.2)
    assert mps.bond_dim > 2
    assert abs(leading_eigenpair(TransferMap(mps.tensor, mps.tensor)).eta1) < 1 - 1e-3
    e = energy_density(mps, _h(math.pi / 4, 0.2, 0.2))
    assert e < energy_density(analytic_mps(math.pi / 4), _h(math.pi / 4, 0.2, 0.2))


@pytest.mark.slow
def test_warm_start_from_grid_neighbour(solved):
    """Seeding with the neighbouring shell's state at (0.2, 0.2) saves sweeps and
    lands on the same state."""
    neighbour, _ = solved(0.1 - math.pi / 100, 0.2, 0.2)
    cold, cold_trace = solved(0.1, 0.2, 0.2)
    warm, warm_trace = ground_state(_h(0.1, 0.2, 0.2), warm_start=neighbour, return_trace=True)
    assert warm_trace.n_sweeps < cold_trace.n_sweeps
    assert abs(leading_eigenpair(TransferMap(warm.tensor, cold.tensor)).eta) > 1 - 1e-6
    assert warm.meta["energy"] == pytest.approx(cold.meta["energy"], abs=1e-9)


def test_solve_point_rotates():
    point = ModelPoint(0.3, 1.0, 2.0)
    rotated, base = solve_point(point)
    h = hamiltonian(point)
    assert energy_density(rotated, h) == pytest.approx(energy_density(base, _h(0.3)), abs=1e-10)


def test_options_validation():
    with pytest.raises(ConfigError):
        SolverOptions(sv_cutoff=0)
    with pytest.raises(ConfigError):
        SolverOptions(dtau=())
    with pytest.raises(ConfigError):
        SolverOptions(max_bond=0)
    with pytest.raises(ConfigError):
        SolverOptions(pinning=-1)
    assert with_schedule(SolverOptions(), 0.1, 0.01).dtau == (0.1, 0.01)
    assert SolverOptions().key() != SolverOptions(pinning=0.0).key()


def test_unconverged_stage_raises():
    opts = SolverOptions(max_sweeps=1, energy_tol=1e-15, entropy_tol=1e-15)
    with pytest.raises(SolverError) as exc:
        ground_state(_h(0.3, 0.2, 0.0), opts)
    assert exc.value.trace is not None and exc.value.trace.n_sweeps > 0


def test_svd_falls_back_when_divide_and_conquer_fails(monkeypatch):
    m = np.random.default_rng(3).standard_normal((12, 8))
    ref = np.linalg.svd(m, compute_uv=False)

    def broken(*args, **kw):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setattr(np.linalg, "svd", broken)
    x, y, z = svd(m)
    assert x.shape == (12, 8) and z.shape == (8, 8)
    assert np.allclose(y, ref, atol=1e-14) and np.allclose((x * y) @ z, m, atol=1e-13)


def test_mismatched_sublattices_raise():
    up = np.zeros((4, 1, 1))
    up[0, 0, 0] = 1.0
    down = np.zeros((4, 1, 1))
    down[3, 0, 0] = 1.0
    cell = _Cell.from_mps(CanonicalMps(up, np.ones(1)))
    cell.B[1] = np.transpose(down, (1, 0, 2))
    with pytest.raises(SymmetrizationError):
        _to_one_site(cell, SolverOptions(), None)


@pytest.mark.slow
def test_correlation_length_is_shortest_at_field_dominated_point(solved):
    """With J1 = 0.2 the alpha = 0 state is nearly the polarized product state, so
    its correlation length sits below both singlet endpoints (values frozen from
    this solver)."""
    from mpsberry.mps import correlation_length

    xi = {a: correlation_length(solved(a, 0.2, 0.0)[0]) for a in (-math.pi / 4, 0.0, math.pi / 4)}
    assert xi[0.0] < min(xi[-math.pi / 4], xi[math.pi / 4])
    for a, want in ((-math.pi / 4, 0.3987), (0.0, 0.2690), (math.pi / 4, 0.4023)):
        assert xi[a] == pytest.approx(want, abs=1e-3)
        mps = solved(a, 0.2, 0.0)[0]
        eta1 = oracles.dense_leading(mps.tensor, mps.tensor)[2][1]
        assert xi[a] == pytest.approx(-1 / math.log(eta1), rel=1e-8)


@pytest.mark.slow
def test_entropy_at_perturbed_point(solved):
    from mpsberry.mps import entanglement_entropy

    mps, _ = solved(math.pi / 8, 0.2, 0.2)
    assert entanglement_entropy(mps) == pytest.approx(0.538841, abs=1e-5)
