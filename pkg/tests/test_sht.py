import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_field
from refimpl import ynm_reference
from sphkol.sht import (
    GridField,
    MeanModeError,
    SpectralField,
    analyze,
    random_real_field,
    synthesize,
    synthesize_complex,
)


def harmonic_samples(n, m, grid):
    return ynm_reference(n, m, grid.theta_nodes[:, None], grid.phi_nodes[None, :])


class TestSpectralField:
    def test_index_checks(self):
        u = SpectralField.zeros(4)
        with pytest.raises(IndexError):
            u[0, 0]
        with pytest.raises(IndexError):
            u[3, 4] = 1.0
        with pytest.raises(IndexError):
            u[5, 1]

    def test_projection_partition_is_exact(self):
        u = rand_field(6, seed=5)
        resum = u.select_degree(1) + u.select_degree(2) + u.highpass(3)
        assert np.array_equal(resum.coeffs, u.coeffs)

    def test_reality_helpers(self):
        u = rand_field(5, seed=9)
        assert u.reality_residual() == 0.0
        u[3, 1] = u[3, 1] + 0.25j
        assert u.reality_residual() > 0.1
        assert u.symmetrized().reality_residual() == 0.0

    def test_mode_vectors(self):
        u = SpectralField.zeros(4)
        u[2, 2] = 1 + 2j
        u[2, -1] = 3.0
        assert np.allclose(u.mode2_vector(), [1 + 2j, 0, 0, 3.0, 0])
        u[1, 0] = 0.5
        assert np.allclose(u.mode1_vector(), [0, 0.5, 0])


class TestAnalyze:
    def test_single_harmonic_projects_to_delta(self, grid8):
        f = GridField(grid8, harmonic_samples(2, 0, grid8).real.copy())
        u = analyze(f)
        want = SpectralField.zeros(8)
        want[2, 0] = 1.0
        assert np.max(np.abs(u.coeffs - want.coeffs)) < 1e-12

    def test_real_combination(self, grid8):
        samples = (harmonic_samples(3, 2, grid8) + harmonic_samples(3, -2, grid8)).real.copy()
        u = analyze(GridField(grid8, samples))
        assert u[3, 2] == pytest.approx(1.0, abs=1e-12)
        assert u[3, -2] == pytest.approx(1.0, abs=1e-12)
        mask = np.abs(u.coeffs) > 1e-12
        assert mask.sum() == 2

    def test_zero_field(self, grid8):
        u = analyze(GridField(grid8, np.zeros((grid8.n_theta, grid8.n_phi))))
        assert np.all(u.coeffs == 0.0)

    def test_mean_mode_rejected(self, grid8):
        values = np.ones((grid8.n_theta, grid8.n_phi)) * 0.01
        with pytest.raises(MeanModeError, match="not mean-zero"):
            analyze(GridField(grid8, values))

    def test_output_reality_by_construction(self, grid8):
        rng = np.random.default_rng(2)
        values = rng.standard_normal((grid8.n_theta, grid8.n_phi))
        values -= grid8.integrate(values) / (4.0 * math.pi)
        u = analyze(GridField(grid8, values), mean_tol=1e-8)
        assert u.reality_residual() == 0.0


class TestSynthesize:
    def test_zonal_closed_form(self, grid8):
        u = SpectralField.zeros(8)
        u[1, 0] = 1.0
        f = synthesize(u, grid8)
        want = 0.5 * math.sqrt(3.0 / math.pi) * np.cos(grid8.theta_nodes)[:, None]
        assert np.max(np.abs(f.values - want)) < 1e-14

    def test_conjugate_pair_gives_real_combination(self, grid8):
        # i Y_2^1 + i Y_2^{-1} is a real field: 2 C_1 sin(theta) cos(theta) sin(phi)
        u = SpectralField.zeros(8)
        u[2, 1] = 1j
        u[2, -1] = 1j
        assert u.reality_residual() == 0.0
        f = synthesize(u, grid8)
        c1 = 0.5 * math.sqrt(15.0 / (2.0 * math.pi))
        theta = grid8.theta_nodes[:, None]
        phi = grid8.phi_nodes[None, :]
        want = 2.0 * c1 * np.sin(theta) * np.cos(theta) * np.sin(phi)
        oracle = (1j * harmonic_samples(2, 1, grid8) + 1j * harmonic_samples(2, -1, grid8)).real
        assert np.max(np.abs(want - oracle)) < 1e-14
        assert np.max(np.abs(f.values - want)) < 1e-13

    def test_imaginary_residue_rejected(self, grid8):
        u = SpectralField.zeros(8)
        u[2, 1] = 1.0  # lone positive-order mode is not a real field
        with pytest.raises(ValueError, match="imaginary residue"):
            synthesize(u, grid8)

    def test_degree_capacity(self, grid8):
        with pytest.raises(ValueError, match="exceeds grid degree"):
            synthesize(SpectralField.zeros(9), grid8)


class TestRoundtripProperties:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_analyze_synthesize_roundtrip(self, grid8, seed):
        u = rand_field(8, seed=seed)
        back = analyze(synthesize(u, grid8))
        assert np.max(np.abs(back.coeffs - u.coeffs)) < 1e-12

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_parseval(self, grid8, seed):
        u = rand_field(8, seed=seed, amplitude=2.0)
        f = synthesize(u, grid8)
        quad = grid8.integrate(f.values**2)
        assert quad == pytest.approx(u.norm() ** 2, rel=1e-11)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_linearity(self, grid8, seed):
        u = rand_field(8, seed=seed)
        v = rand_field(8, seed=seed + 77)
        a, b = 1.7, -0.4
        lhs = analyze(
            GridField(grid8, a * synthesize(u, grid8).values + b * synthesize(v, grid8).values)
        )
        rhs = a * u + b * v
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) < 1e-12

    def test_complex_synthesis_matches_reference(self, grid8):
        u = SpectralField.zeros(8)
        u[4, -3] = 0.3 - 1.1j
        got = synthesize_complex(u, grid8)
        want = (0.3 - 1.1j) * harmonic_samples(4, -3, grid8)
        assert np.max(np.abs(got - want)) < 1e-13

    def test_roundtrip_of_lower_degree_field(self, grid8):
        # a field truncated below the grid degree comes back zero-padded
        u = rand_field(5, seed=88)
        back = analyze(synthesize(u, grid8))
        assert back.N == 8
        assert np.max(np.abs(back.coeffs[:6, 3:14] - u.coeffs)) < 1e-12
        assert back.highpass_norm(6) < 1e-12


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        u = rand_field(6, seed=31)
        path = tmp_path / "field.json"
        u.save(path)
        v = SpectralField.load(path)
        assert v.N == u.N
        assert np.max(np.abs(v.coeffs - u.coeffs)) == 0.0

    def test_schema_and_digits(self, tmp_path):
        u = SpectralField.zeros(3)
        u[2, 1] = 1.0 / 3.0 + (1.0 / 7.0) * 1j
        u[2, -1] = -np.conj(u[2, 1])
        path = tmp_path / "field.json"
        u.save(path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"N", "coeffs"}
        assert all(item["m"] >= 0 for item in doc["coeffs"])
        text = path.read_text()
        assert "0.33333333333333331" in text  # 17 significant digits
        loaded = SpectralField.load(path)
        assert loaded[2, -1] == -np.conj(loaded[2, 1])

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            SpectralField.from_json_dict({"N": 3, "coeffs": [{"n": 2, "m": -1, "re": 1.0, "im": 0.0}]})


class TestGridField:
    def test_shape_validation(self, grid8):
        with pytest.raises(ValueError):
            GridField(grid8, np.zeros((3, 3)))

    def test_random_field_reality(self):
        u = random_real_field(7, np.random.default_rng(4), degrees=(2, 5))
        assert u.reality_residual() == 0.0
        assert u.degree_norm(3) == 0.0
        assert u.degree_norm(5) > 0.0
