import math

import numpy as np
import pytest

from leakywire.curve import PlanarCurvatureProfile, SampledParametric
from leakywire.errors import AssumptionError, GeometryError
from leakywire.operators import GridSpec, kappa0, zeta0
from leakywire.solver import (
    SolveConfig,
    converge_study,
    find_bound_states,
    spectrum_scan,
    states_to_dict,
)

from conftest import bump_solution


class TestStraightLineNullity:
    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0])
    def test_no_states(self, straight, alpha):
        for grid in (GridSpec(16.0, 128), GridSpec(24.0, 256)):
            config = SolveConfig(alpha=alpha, grid=grid)
            assert find_bound_states(straight, config) == []


class TestBumpBinding:
    def test_state_exists_below_edge(self):
        config, states = bump_solution(24.0, 1024)
        accepted = [s for s in states if not s.threshold_uncertain]
        assert len(accepted) >= 1
        st = accepted[0]
        z0 = zeta0(0.0)
        assert st.energy < z0 - 1e-4 * abs(z0)
        assert st.kappa_tilde > kappa0(0.0)
        assert st.gap > 0
        assert st.residual <= config.tol_lambda

    def test_grid_agreement(self):
        _, states_a = bump_solution(24.0, 1024)
        _, states_b = bump_solution(36.0, 2048)
        e_a = states_a[0].energy
        e_b = states_b[0].energy
        assert abs(e_a - e_b) / abs(e_b) < 1e-3

    def test_states_sorted_with_distinct_branches(self):
        _, states = bump_solution(24.0, 1024)
        energies = [s.energy for s in states]
        assert energies == sorted(energies)
        branches = [s.branch for s in states]
        assert len(branches) == len(set(branches))

    def test_ground_eigenvector_positive(self):
        # Perron-Frobenius-style check on the grid interior
        _, states = bump_solution(24.0, 1024)
        h = states[0].h
        peak_sign = math.copysign(1.0, h[int(np.argmax(np.abs(h)))])
        assert np.min(h * peak_sign) > 0

    def test_unique_sign_change_per_branch(self):
        config, states = bump_solution(24.0, 1024)
        st = states[0]
        curve = PlanarCurvatureProfile.gaussian_bump(1.0, 1.0, 56.0)
        sc, crossings = spectrum_scan(
            curve, config, (kappa0(0.0) * (1 + 1e-4), 4 * kappa0(0.0)), 12)
        ground = [c for c in crossings if c.branch == 0]
        assert len(ground) == 1
        assert ground[0].kappa == pytest.approx(st.kappa_tilde, rel=1e-8)

    def test_weak_bending_reported_not_dropped(self):
        # near-threshold branches must surface as flagged records (or real
        # states), never vanish silently
        for a in (0.05, 0.1, 0.2):
            curve = PlanarCurvatureProfile.gaussian_bump(a, 1.0, 56.0)
            config = SolveConfig(alpha=0.0, grid=GridSpec(24.0, 512))
            states = find_bound_states(curve, config)
            assert len(states) >= 1
            st = states[0]
            if st.threshold_uncertain:
                assert st.diagnostics
            else:
                assert st.energy < zeta0(0.0)

    def test_inadmissible_curve_rejected(self):
        # a nearly closed circle: endpoints almost touch, so the chord-arc
        # constant collapses and the audit must veto the solve
        ang = np.linspace(-np.pi, np.pi, 401)
        loop = SampledParametric(
            np.column_stack([ang, np.cos(ang), np.sin(ang), np.zeros_like(ang)]))
        config = SolveConfig(alpha=0.0, grid=GridSpec(3.14, 64))
        with pytest.raises(AssumptionError):
            find_bound_states(loop, config)


class TestSpectrumScan:
    def test_straight_crossing_at_kappa0(self, straight):
        for alpha in (0.0, 0.3):
            config = SolveConfig(alpha=alpha, grid=GridSpec(16.0, 256))
            k0 = kappa0(alpha)
            _, crossings = spectrum_scan(straight, config, (0.5 * k0, 3.0 * k0), 15)
            ground = [c for c in crossings if c.branch == 0]
            assert len(ground) == 1
            assert abs(ground[0].kappa - k0) / k0 < 1e-10

    def test_no_crossings_when_alpha_above_curve(self, straight):
        config = SolveConfig(alpha=5.0, grid=GridSpec(16.0, 128))
        k0 = kappa0(0.0)
        _, crossings = spectrum_scan(straight, config, (k0, 3.0 * k0), 8)
        assert crossings == []

    def test_bump_crossing_above_kappa0(self):
        config, states = bump_solution(24.0, 1024)
        assert states[0].kappa_tilde > kappa0(0.0)

    def test_bad_range_rejected(self, straight):
        config = SolveConfig(alpha=0.0, grid=GridSpec(8.0, 64))
        with pytest.raises(GeometryError):
            spectrum_scan(straight, config, (2.0, 1.0), 5)


class TestConvergeStudy:
    def test_straight_vacuous_pass(self, straight):
        config = SolveConfig(alpha=0.0, grid=GridSpec(16.0, 128), refine_levels=2)
        report = converge_study(straight, config)
        assert report.accepted
        assert all(lv.energy is None for lv in report.levels)

    def test_bump_second_order(self, bump):
        config = SolveConfig(alpha=0.0, grid=GridSpec(16.0, 512), refine_levels=3)
        report = converge_study(bump, config)
        assert report.accepted
        assert report.observed_order == pytest.approx(2.0, abs=0.5)
        assert report.richardson_energy is not None
        # larger box moves the energy by far less than the level gap scale
        assert report.tail_change < 1e-2

    def test_too_few_levels_rejected(self, straight):
        config = SolveConfig(alpha=0.0, grid=GridSpec(16.0, 128), refine_levels=1)
        with pytest.raises(GeometryError):
            converge_study(straight, config)


class TestSerialization:
    def test_states_json_shape(self):
        config, states = bump_solution(24.0, 1024)
        doc = states_to_dict(config.alpha, config.grid, states)
        assert doc["alpha"] == 0.0
        assert doc["zeta0"] == pytest.approx(zeta0(0.0), abs=1e-15)
        assert doc["grid"] == {"L": 24.0, "N": 1024}
        for entry in doc["states"]:
            assert set(entry) == {"kappa", "energy", "gap", "branch",
                                  "residual", "threshold_uncertain"}

    def test_config_validation(self):
        with pytest.raises(GeometryError):
            SolveConfig(alpha=0.0, grid=GridSpec(8.0, 64), kappa_bracket_growth=0.5)
        with pytest.raises(GeometryError):
            SolveConfig(alpha=0.0, grid=GridSpec(8.0, 64), tol_lambda=-1.0)
