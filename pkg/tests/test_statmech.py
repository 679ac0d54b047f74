import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import logsumexp

from bohmstat import statmech as sm
from bohmstat.errors import (EmptyRegion, GridTooCoarse, NotADensityMatrix,
                             OutsideAllCells, TruncationInsufficient)


def random_density(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


class TestVonNeumann:
    def test_pure_state_zero(self):
        assert sm.von_neumann_entropy([1.0, 0.0, 0.0]) == 0.0

    def test_maximally_mixed_qubit(self):
        assert sm.von_neumann_entropy(np.eye(2) / 2) == \
            pytest.approx(np.log(2), abs=1e-14)

    def test_harmonic_thermal_closed_form(self):
        beta, omega = 0.7, 1.3
        _, p, _ = sm.partition_function(sm.harmonic_spectrum(omega, 400), beta)
        assert sm.von_neumann_entropy(p) == \
            pytest.approx(sm.harmonic_thermal_entropy(omega, beta), abs=1e-8)

    def test_unitary_invariance(self):
        rho = random_density(6, 0)
        q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((6, 6))
                            + 1j * np.random.default_rng(2).standard_normal((6, 6)))
        assert sm.von_neumann_entropy(q @ rho @ q.conj().T) == \
            pytest.approx(sm.von_neumann_entropy(rho), abs=1e-10)

    def test_additive_on_products(self):
        p = np.array([0.7, 0.3])
        q = np.array([0.5, 0.25, 0.25])
        assert sm.von_neumann_entropy(np.outer(p, q).ravel()) == \
            pytest.approx(sm.von_neumann_entropy(p)
                          + sm.von_neumann_entropy(q), abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 10**6))
    def test_bounded_by_log_dim(self, dim, seed):
        s = sm.von_neumann_entropy(random_density(dim, seed))
        assert -1e-12 <= s <= np.log(dim) + 1e-12

    def test_rejects_bad_matrices(self):
        with pytest.raises(NotADensityMatrix):
            sm.von_neumann_entropy(np.array([[0.5, 1.0], [0.0, 0.5]]))
        with pytest.raises(NotADensityMatrix):
            sm.von_neumann_entropy([1.2, -0.2])
        with pytest.raises(NotADensityMatrix):
            sm.von_neumann_entropy([0.4, 0.4])

    def test_k_rescale(self):
        assert sm.von_neumann_entropy([0.5, 0.5], k=2.0) == \
            pytest.approx(2 * np.log(2))


class TestMacrostates:
    def test_dim_arithmetic(self):
        # L * 2 p_cut / (2 pi) = 10 * 2 pi / (2 pi) = 10
        assert sm.macrostate_dim(10.0, np.pi) == 10
        assert sm.macrostate_dim([10.0, 4.0], np.pi) == 40

    def test_dim_floors_and_clamps(self):
        assert sm.macrostate_dim(0.95, np.pi) == 1   # floor(0.95) -> clamp 1
        assert sm.macrostate_dim(1.99, np.pi) == 1

    def test_dim_requires_positive_cutoff(self):
        with pytest.raises(ValueError):
            sm.macrostate_dim(1.0, 0.0)

    def test_boundary_tie_goes_low(self):
        d = sm.MacrostateDecomposition.from_intervals_1d([0.0, 1.0, 2.0],
                                                         2 * np.pi)
        assert sm.macrostate_of(1.0, d) == 0
        assert sm.macrostate_of(1.5, d) == 1

    def test_outside_raises(self):
        d = sm.MacrostateDecomposition.from_intervals_1d([0.0, 1.0], np.pi)
        with pytest.raises(OutsideAllCells):
            sm.macrostate_of(2.0, d)

    def test_mismatched_dims_rejected(self):
        with pytest.raises(ValueError):
            sm.MacrostateDecomposition([[(0.0, 1.0)]], [1, 2])

    def test_entropy_series_values(self):
        d = sm.MacrostateDecomposition([[(0.0, 1.0)], [(1.0, 3.0)]], [1, 4])
        paths = np.array([[[0.5], [2.0]]])       # one sample, two times
        s = sm.macrostate_entropy_series(paths, d)
        np.testing.assert_allclose(s, [[0.0, np.log(4)]])


class TestGibbs:
    def test_delta_z_shift_is_exact(self):
        samples = np.random.default_rng(3).standard_normal(2000)
        edges = [np.linspace(-5, 5, 41)]
        a = sm.gibbs_entropy(samples, 1.0, edges)
        b = sm.gibbs_entropy(samples, 2.5, edges)
        assert b == pytest.approx(a - np.log(2.5), abs=1e-12)

    def test_gaussian_differential_entropy(self):
        sigma = 1.7
        samples = sigma * np.random.default_rng(4).standard_normal(100_000)
        edges = [np.linspace(-6 * sigma, 6 * sigma, 120)]
        expect = 0.5 * np.log(2 * np.pi * np.e * sigma**2)
        assert sm.gibbs_entropy(samples, 1.0, edges) == \
            pytest.approx(expect, rel=0.02)

    def test_positive_delta_z_required(self):
        with pytest.raises(ValueError):
            sm.gibbs_entropy(np.zeros(5), 0.0, [np.linspace(-1, 1, 5)])

    def test_coarse_grained_single_cell(self):
        assert sm.coarse_grained_gibbs([1.0]) == 0.0

    def test_coarse_grained_uniform_log_w(self):
        assert sm.coarse_grained_gibbs(np.ones(8)) == \
            pytest.approx(np.log(8), abs=1e-12)

    def test_coarse_grained_weights(self):
        # concentrated mass in a cell of weight W gives k ln W
        assert sm.coarse_grained_gibbs([1.0, 0.0], [16.0, 1.0]) == \
            pytest.approx(np.log(16), abs=1e-12)


class TestBoltzmann:
    def test_log_ratio(self):
        assert sm.boltzmann_entropy(8.0, 2.0) == pytest.approx(np.log(4))

    def test_empty_region(self):
        with pytest.raises(EmptyRegion):
            sm.boltzmann_entropy(0.0, 1.0)

    def test_one_particle_scales_with_count(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((4000, 3))
        p = rng.standard_normal((4000, 3))
        edges = np.linspace(-5, 5, 31)
        s3 = sm.one_particle_boltzmann(x, p, 1.0, edges, edges)
        pooled = np.column_stack([x.ravel(), p.ravel()])
        s1 = sm.gibbs_entropy(pooled, 1.0, [edges, edges])
        assert s3 == pytest.approx(3 * s1, abs=1e-12)


class TestPartitionFunction:
    def test_two_level_exact(self):
        gap, beta = 1.3, 0.8
        z, p, log_z = sm.partition_function(sm.Spectrum([0.0, gap]), beta)
        assert log_z == pytest.approx(np.log1p(np.exp(-beta * gap)), abs=1e-14)
        assert p[1] / p[0] == pytest.approx(np.exp(-beta * gap), abs=1e-14)

    def test_harmonic_geometric_series(self):
        omega, beta = 1.1, 1.5
        _, _, log_z = sm.partition_function(sm.harmonic_spectrum(omega, 60),
                                            beta)
        exact = -0.5 * beta * omega - np.log1p(-np.exp(-beta * omega))
        assert log_z == pytest.approx(exact, abs=1e-10)

    def test_box_against_logsumexp(self):
        spec = sm.box_spectrum(1.0, mass=50.0, count=10_000)
        beta = 1.0
        _, _, log_z = sm.partition_function(spec, beta)
        assert log_z == pytest.approx(logsumexp(-beta * spec.levels),
                                      abs=1e-12)

    def test_truncation_guard(self):
        spec = sm.box_spectrum(1.0, mass=50.0, count=5)
        with pytest.raises(TruncationInsufficient):
            sm.partition_function(spec, 0.01)

    def test_positive_beta_required(self):
        with pytest.raises(ValueError):
            sm.partition_function(sm.Spectrum([0.0, 1.0]), -1.0)

    def test_two_level_direct_energy(self):
        gap, beta = 2.0, 0.9
        e, s = sm.direct_energy_entropy(sm.Spectrum([0.0, gap]), beta)
        w = np.exp(-beta * gap)
        assert e == pytest.approx(gap * w / (1 + w), abs=1e-14)

    def test_harmonic_coth_energy(self):
        omega, beta = 0.9, 1.2
        e, _ = sm.direct_energy_entropy(sm.harmonic_spectrum(omega, 200), beta)
        assert e == pytest.approx(sm.harmonic_thermal_energy(omega, beta),
                                  abs=1e-10)

    def test_descending_levels_rejected(self):
        with pytest.raises(ValueError):
            sm.Spectrum([1.0, 0.0])


def two_level_family(v):
    return sm.Spectrum([0.0, 1.0 / v**2], volume=v)


class TestThermoTable:
    def make(self, nv=41, nt=201):
        return sm.thermo_table(two_level_family,
                               np.linspace(0.95, 1.05, nv),
                               np.linspace(0.9, 1.1, nt))

    def test_dual_route_energy(self):
        t = self.make(nv=5, nt=201)
        interior = t.energy[:, 1:-1]
        rel = np.abs(interior - t.energy_direct[:, 1:-1]) \
            / np.abs(t.energy_direct[:, 1:-1])
        assert np.max(rel) < 1e-4

    def test_dual_route_entropy(self):
        t = self.make(nv=5, nt=201)
        diff = np.abs(t.entropy[:, 1:-1] - t.entropy_direct[:, 1:-1])
        assert np.max(diff) < 1e-4

    def test_first_law_residual_small(self):
        res, stats = sm.first_law_residual(self.make())
        assert stats["median"] < 1e-5
        assert stats["n_edges"] == len(res)

    def test_first_law_second_order(self):
        _, coarse = sm.first_law_residual(self.make(nv=21, nt=51))
        _, fine = sm.first_law_residual(self.make(nv=41, nt=101))
        assert coarse["median"] / fine["median"] > 3.0

    def test_coarse_grid_rejected(self):
        with pytest.raises(GridTooCoarse):
            sm.thermo_table(two_level_family, np.linspace(1, 2, 3),
                            np.linspace(1, 2, 10))

    def test_nonuniform_grid_rejected(self):
        with pytest.raises(GridTooCoarse):
            sm.thermo_table(two_level_family, np.linspace(1, 2, 6),
                            np.geomspace(1, 2, 10))

    def test_free_energy_sign(self):
        t = self.make(nv=5, nt=5)
        np.testing.assert_allclose(
            t.free_energy, -t.k * t.t_grid[None, :] * t.log_z)


class TestBohmianVolume:
    def test_thermal_box_occupation(self):
        rep = sm.bohmian_volume_check(1.0, 20.0, levels=16, grid_n=128,
                                      samples=2000, seed=0)
        assert rep["max_abs_current"] == 0.0
        assert rep["all_inside"]
        assert rep["spread_fraction"] > 0.5
