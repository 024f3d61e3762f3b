import math

import numpy as np
import pytest

from gaugesim.semiclassical import (Trajectories, hall_velocity_ensemble,
                                    integrate_eom, linearized_hall_velocity,
                                    obc_eigencheck, obc_modes)

TWO_PI = 2.0 * math.pi
RATE = TWO_PI * 2.0


class TestModes:
    def test_mode_grid(self):
        m = obc_modes(3, 2, RATE)
        assert m.kx.size == 6
        assert m.kx.min() == pytest.approx(math.pi / 4)
        assert m.ky.max() == pytest.approx(2 * math.pi / 3)

    def test_energies(self):
        m = obc_modes(2, 2, RATE)
        want = -2.0 * RATE * (np.cos(m.kx) + np.cos(m.ky))
        assert np.allclose(m.energy, want)

    def test_corner_weights_complete(self):
        # a corner-localized packet decomposes exactly over the modes
        for nx, ny in ((1, 1), (4, 4), (5, 3)):
            m = obc_modes(nx, ny, RATE)
            assert m.corner_amp @ m.corner_amp == pytest.approx(1.0, abs=1e-12)

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            obc_modes(0, 3, RATE)


class TestEigencheck:
    def test_small_blocks(self):
        assert obc_eigencheck(4, 4, RATE) < 1e-12
        assert obc_eigencheck(5, 3, RATE) < 1e-12


class TestEom:
    def test_free_ballistic(self):
        # no force, no flux: k frozen, straight-line motion at the
        # group velocity
        ts = np.linspace(0.0, 2.0 / RATE, 21)
        tr = integrate_eom([0.7], [0.3], (0.0, 0.0), 0.0, RATE, ts)
        assert np.abs(tr.kx - 0.7).max() < 1e-12
        assert np.abs(tr.ky - 0.3).max() < 1e-12
        want_x = 2.0 * RATE * math.sin(0.7) * ts
        assert np.abs(tr.x[0] - want_x).max() < 1e-9

    def test_magnetic_field_does_no_work(self):
        ts = np.linspace(0.0, 4.0 / RATE, 41)
        tr = integrate_eom([0.9], [-0.4], (0.0, 0.0), 0.05, RATE, ts)
        e = -2.0 * RATE * (np.cos(tr.kx[0]) + np.cos(tr.ky[0]))
        assert np.abs(e - e[0]).max() < 1e-8 * RATE

    def test_bloch_oscillation(self):
        # force along x only: kx winds linearly, x oscillates with the
        # Bloch period instead of running away
        e0 = 0.5 * RATE
        period = TWO_PI / e0
        ts = np.linspace(0.0, period, 81)
        tr = integrate_eom([0.0], [0.0], (e0, 0.0), 0.0, RATE, ts)
        assert tr.kx[0, -1] == pytest.approx(TWO_PI, rel=1e-10)
        assert abs(tr.x[0, -1]) < 1e-8
        assert np.abs(tr.y[0]).max() < 1e-12

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            integrate_eom([0.1, 0.2], [0.1], (0.0, 0.0), 0.0, RATE, [0.0, 1.0])

    def test_velocity_properties(self):
        tr = Trajectories(times=np.zeros(1), kx=np.array([[0.25]]),
                          ky=np.array([[1.1]]), x=np.zeros((1, 1)),
                          y=np.zeros((1, 1)), rate=3.0)
        assert tr.vx[0, 0] == pytest.approx(6.0 * math.sin(0.25))
        assert tr.vy[0, 0] == pytest.approx(6.0 * math.sin(1.1))


class TestHallEnsemble:
    times = np.linspace(0.0, 2.0 / RATE, 41)

    def test_no_force_no_drift(self):
        # transverse components cancel mode by mode under the diagonal
        # mirror; the longitudinal component is unconstrained
        hv = hall_velocity_ensemble(0.0, 0.02, 4, 4, RATE, self.times)
        assert np.abs(hv.v_hall).max() < 1e-10

    def test_no_flux_no_hall(self):
        hv = hall_velocity_ensemble(0.1 * RATE, 0.0, 4, 4, RATE, self.times)
        assert np.abs(hv.v_hall).max() < 1e-10

    def test_hall_drift_odd_in_flux(self):
        hp = hall_velocity_ensemble(0.1 * RATE, 0.02, 4, 4, RATE, self.times)
        hm = hall_velocity_ensemble(0.1 * RATE, -0.02, 4, 4, RATE, self.times)
        assert np.abs(hp.v_hall + hm.v_hall).max() < 1e-10
        assert np.abs(hp.v_hall).max() > 1e-4 * RATE

    def test_linearized_oracle_single_mode(self):
        # 1x1 block puts the packet exactly at the band midpoint where
        # the small-field expansion is cleanest
        hv = hall_velocity_ensemble(0.1 * RATE, 0.02, 1, 1, RATE, self.times)
        lin = linearized_hall_velocity(0.1 * RATE, 0.02, RATE, self.times)
        scale = np.abs(lin).max()
        assert np.abs(hv.v_hall - lin).max() < 0.01 * scale

    def test_weights_stored(self):
        hv = hall_velocity_ensemble(0.1 * RATE, 0.02, 3, 3, RATE, self.times)
        assert hv.weights.sum() == pytest.approx(1.0, abs=1e-12)
