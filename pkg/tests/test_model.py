import math

import numpy as np
import pytest
import scipy.constants as const
import scipy.integrate
from hypothesis import given
from hypothesis import strategies as st

import dbnoise as dbn
from dbnoise.model import BOUNDARY_TOL, potential_parts


def test_electron_mass_constant_matches_si():
    # independent route: m_e c^2 / c^2 with CODATA values in SI
    m_si = const.m_e * const.c**2 / const.e  # eV
    expected = m_si / (const.c * 1e9 / 1e15) ** 2  # eV fs^2 / nm^2
    assert dbn.ELECTRON_MASS == pytest.approx(expected, rel=1e-9)


def test_mass_ratio_round_trip_exact():
    model = dbn.PhysicalModel(mass_ratio=0.067)
    again = dbn.PhysicalModel.from_effective_mass(model.effective_mass)
    assert abs(again.mass_ratio - 0.067) <= 1e-12 * 0.067


def test_model_validation():
    with pytest.raises(dbn.ConfigError):
        dbn.PhysicalModel(mass_ratio=-1.0)
    with pytest.raises(dbn.ConfigError):
        dbn.PhysicalModel(hbar=0.0)


class TestGrid:
    def test_default_spacing(self):
        g = dbn.Grid1D.from_spacing(-700.0, 700.0, 0.05)
        assert g.n_points == 28001
        assert g.dx == pytest.approx(0.05, abs=1e-15)

    def test_symmetric_grid_nodes_are_exact_negatives(self):
        g = dbn.Grid1D.from_spacing(-700.0, 700.0, 0.05)
        assert np.all(g.x == -g.x[::-1])
        assert g.x[14000] == 0.0

    def test_must_straddle_zero(self):
        with pytest.raises(dbn.ConfigError):
            dbn.Grid1D(10.0, 20.0, 11)


class TestPotential:
    def setup_method(self):
        self.model = dbn.PhysicalModel()
        self.grid = dbn.Grid1D.from_spacing(-50.0, 50.0, 0.05)
        self.spec = dbn.PotentialSpec()

    def test_static_well_is_zero(self):
        v = dbn.build_potential(self.spec, self.grid, t=123.4)
        i = np.argmin(np.abs(self.grid.x - 0.0))
        assert v[i] == 0.0

    def test_left_barrier_slab_height(self):
        # x = -3.1 nm sits inside the left barrier slab
        v = dbn.build_potential(self.spec, self.grid, t=0.0)
        i = np.argmin(np.abs(self.grid.x + 3.1))
        assert v[i] == pytest.approx(0.4, abs=0.0)

    def test_quarter_period_well_floor(self):
        w = 2.0e-3
        spec = dbn.PotentialSpec(osc_angular_frequency=w)
        t = (math.pi / 2.0) / w
        v = dbn.build_potential(spec, self.grid, t)
        i = np.argmin(np.abs(self.grid.x - 0.0))
        assert v[i] == pytest.approx(0.2, rel=1e-12)

    def test_edge_nodes_take_cell_average(self):
        # a node exactly on a region edge straddles it half-half
        v = dbn.build_potential(self.spec, self.grid, t=0.0)
        x = self.grid.x

        def at(val):
            return v[np.argmin(np.abs(x - val))]

        assert at(-3.6) == pytest.approx(0.2)   # half barrier, half outside
        assert at(-2.6) == pytest.approx(0.2)   # half barrier, half well
        assert at(2.6) == pytest.approx(0.2)
        assert at(3.6) == pytest.approx(0.2)
        # one node inward / outward is purely one region
        assert at(-3.55) == pytest.approx(0.4)
        assert at(-3.65) == 0.0

    def test_effective_widths_are_exact(self):
        # cell-averaged sampling conserves each region's integrated area
        for dx in (0.05, 0.04, 0.03):
            grid = dbn.Grid1D.from_spacing(-50.0, 50.0, dx)
            v = dbn.build_potential(self.spec, grid, t=0.0)
            area = np.sum(v) * grid.dx
            assert area == pytest.approx(0.4 * 2.0, rel=1e-12)

    def test_mirror_symmetry_exact(self):
        spec = dbn.PotentialSpec(osc_angular_frequency=3e-4)
        v = dbn.build_potential(spec, self.grid, t=777.7)
        assert np.array_equal(v, v[::-1])

    def test_periodicity(self):
        w = 5.0e-4
        spec = dbn.PotentialSpec(osc_angular_frequency=w)
        t = 321.0
        v1 = dbn.build_potential(spec, self.grid, t)
        v2 = dbn.build_potential(spec, self.grid, t + 2.0 * math.pi / w)
        assert np.allclose(v1, v2, rtol=0.0, atol=1e-12)

    @given(
        t=st.floats(-1e4, 1e4),
        w=st.floats(0.0, 1e-2),
        sign=st.sampled_from([1, -1]),
    )
    def test_bounded(self, t, w, sign):
        spec = dbn.PotentialSpec(osc_angular_frequency=w, osc_sign=sign)
        grid = dbn.Grid1D.from_spacing(-20.0, 20.0, 0.1)
        v = dbn.build_potential(spec, grid, t)
        assert np.all(v <= spec.barrier_height + spec.osc_amplitude + 1e-15)
        assert np.all(v >= -spec.osc_amplitude - 1e-15)

    def test_grid_too_small(self):
        grid = dbn.Grid1D(-2.0, 2.0, 41)
        with pytest.raises(dbn.GridTooSmallError):
            dbn.build_potential(self.spec, grid, 0.0)

    def test_nonfinite_time_rejected(self):
        with pytest.raises(dbn.ConfigError):
            dbn.build_potential(self.spec, self.grid, math.nan)

    def test_well_nodes_contiguous(self):
        v_static, well_idx, well_frac = potential_parts(self.spec, self.grid)
        assert np.all(np.diff(well_idx) == 1)
        assert np.all(well_frac > 0.0)
        assert np.all(well_frac <= 1.0)
        # interior well nodes carry no barrier part
        interior = well_frac == 1.0
        assert np.all(v_static[well_idx[interior]] == 0.0)

    def test_oscillation_phase_and_sign(self):
        spec = dbn.PotentialSpec(
            osc_angular_frequency=1e-3, osc_sign=-1, osc_phase=0.3
        )
        assert spec.well_floor(50.0) == pytest.approx(
            -0.2 * math.sin(1e-3 * 50.0 + 0.3), rel=1e-14
        )

    def test_validation(self):
        with pytest.raises(dbn.ConfigError):
            dbn.PotentialSpec(barrier_height=0.0)
        with pytest.raises(dbn.ConfigError):
            dbn.PotentialSpec(barrier_width=-1.0)
        with pytest.raises(dbn.ConfigError):
            dbn.PotentialSpec(osc_sign=2)


class TestGaussian:
    def setup_method(self):
        self.model = dbn.PhysicalModel()
        self.grid = dbn.Grid1D.from_spacing(-700.0, 700.0, 0.05)
        self.spec = dbn.WavePacketSpec(x0=-175.0, sigma=50.0, energy=0.073)

    def test_norm_is_one(self):
        f = dbn.init_gaussian(self.spec, self.grid, self.model)
        assert f.norm_sq() == pytest.approx(1.0, abs=1e-9)

    def test_centroid(self):
        f = dbn.init_gaussian(self.spec, self.grid, self.model)
        assert abs(f.centroid() - self.spec.x0) < self.grid.dx

    def test_position_std_is_half_sigma(self):
        # oracle: direct quadrature of the stated density ~ exp(-2 u^2 / s^2)
        s = self.spec.sigma
        num, _ = scipy.integrate.quad(
            lambda u: u * u * math.exp(-2 * u * u / s**2), -8 * s, 8 * s
        )
        den, _ = scipy.integrate.quad(
            lambda u: math.exp(-2 * u * u / s**2), -8 * s, 8 * s
        )
        expected = math.sqrt(num / den)
        assert expected == pytest.approx(s / 2.0, rel=1e-10)
        f = dbn.init_gaussian(self.spec, self.grid, self.model)
        assert f.position_std() == pytest.approx(expected, rel=1e-6)

    def test_central_wavenumber_against_si_constants(self):
        # independent constants route, SI -> 1/nm
        e_j = 0.073 * const.e
        k_si = math.sqrt(2 * 0.067 * const.m_e * e_j) / const.hbar  # 1/m
        expected = k_si * 1e-9
        assert self.spec.k0(self.model) == pytest.approx(expected, rel=1e-9)
        assert expected == pytest.approx(0.359, abs=1e-3)

    def test_discrete_mean_wavenumber(self):
        f = dbn.init_gaussian(self.spec, self.grid, self.model)
        k_tol = 2.0 * math.pi / (self.grid.n_points * self.grid.dx)
        assert abs(f.mean_wavenumber() - self.spec.k0(self.model)) < k_tol

    def test_direction_flips_k0(self):
        mirrored = self.spec.mirrored()
        assert mirrored.x0 == -self.spec.x0
        assert mirrored.k0(self.model) == -self.spec.k0(self.model)

    def test_mirrored_field_is_exact_reflection(self):
        fa = dbn.init_gaussian(self.spec, self.grid, self.model)
        fb = dbn.init_gaussian(self.spec.mirrored(), self.grid, self.model)
        assert np.array_equal(fb.values, fa.values[::-1])

    def test_deterministic(self):
        f1 = dbn.init_gaussian(self.spec, self.grid, self.model)
        f2 = dbn.init_gaussian(self.spec, self.grid, self.model)
        assert np.array_equal(f1.values, f2.values)

    def test_truncation_error(self):
        spec = dbn.WavePacketSpec(x0=-600.0, sigma=50.0, energy=0.073)
        with pytest.raises(dbn.TruncationError):
            dbn.init_gaussian(spec, self.grid, self.model)

    def test_validation(self):
        with pytest.raises(dbn.ConfigError):
            dbn.WavePacketSpec(x0=-175.0, sigma=-1.0, energy=0.073)
        with pytest.raises(dbn.ConfigError):
            dbn.WavePacketSpec(x0=-175.0, sigma=50.0, energy=0.0)


class TestWaveField:
    def test_values_frozen_and_copied(self):
        grid = dbn.Grid1D.from_spacing(-5.0, 5.0, 0.1)
        raw = np.ones(grid.n_points, dtype=complex)
        f = dbn.WaveField(grid=grid, values=raw, time=0.0)
        raw[0] = 123.0
        assert f.values[0] == 1.0
        with pytest.raises(ValueError):
            f.values[0] = 0.0

    def test_shape_checked(self):
        grid = dbn.Grid1D.from_spacing(-5.0, 5.0, 0.1)
        with pytest.raises(dbn.ConfigError):
            dbn.WaveField(grid=grid, values=np.ones(3, dtype=complex))


def test_side_weights_split_center_evenly():
    grid = dbn.Grid1D.from_spacing(-1.0, 1.0, 0.25)
    wl, wr = dbn.model.side_weights(grid)
    i0 = np.argmin(np.abs(grid.x))
    assert abs(grid.x[i0]) <= BOUNDARY_TOL
    assert wl[i0] == wr[i0] == pytest.approx(grid.dx / 2)
    assert np.sum(wl + wr) == pytest.approx(grid.dx * grid.n_points, rel=1e-14)
