import math

import numpy as np
import pytest

from gaugesim.calibrate import (calibrate_amplitude,
                                calibrate_device_amplitudes,
                                effective_coupling_map, fit_hopping_rate,
                                phase_offset_scan)
from gaugesim.device import MOD_FREQ_MHZ, OWNED_BONDS

TWO_PI = 2.0 * math.pi


class TestRateFit:
    def test_exact_recovery(self):
        ts = np.linspace(0.0, 1.2, 121)
        fit = fit_hopping_rate(ts, np.sin(6.7 * ts) ** 2)
        assert abs(fit.rate - 6.7) < 1e-3
        assert abs(fit.amplitude - 1.0) < 1e-3
        assert abs(fit.offset) < 1e-3
        assert fit.rms < 1e-3

    def test_amplitude_offset_phase(self):
        ts = np.linspace(0.0, 2.0, 161)
        pops = 0.55 * np.sin(4.1 * ts + 0.3) ** 2 + 0.12
        fit = fit_hopping_rate(ts, pops)
        assert abs(fit.rate - 4.1) < 1e-3
        assert abs(fit.amplitude - 0.55) < 1e-3
        assert abs(fit.offset - 0.12) < 1e-3
        assert abs(fit.phase - 0.3) < 1e-2

    def test_noisy_traces(self):
        # a few percent of readout noise should not move the rate much
        rng = np.random.default_rng(42)
        ts = np.linspace(0.0, 1.5, 151)
        for _ in range(5):
            j = rng.uniform(3.0, 20.0)
            pops = np.sin(j * ts) ** 2 + rng.normal(0.0, 0.02, ts.size)
            fit = fit_hopping_rate(ts, pops)
            assert abs(fit.rate - j) / j < 0.01

    def test_custom_grid(self):
        ts = np.linspace(0.0, 1.0, 101)
        pops = np.sin(12.0 * ts) ** 2
        fit = fit_hopping_rate(ts, pops, rate_grid=np.linspace(10.0, 14.0, 401))
        assert abs(fit.rate - 12.0) < 1e-3

    def test_flat_trace_raises(self):
        ts = np.linspace(0.0, 1.0, 50)
        with pytest.raises(RuntimeError):
            fit_hopping_rate(ts, np.full(50, 0.25))

    def test_bad_input_raises(self):
        with pytest.raises(ValueError):
            fit_hopping_rate([0.0, 0.1], [0.0, 0.5])


class TestAmplitudeCalibration:
    def test_hits_target_on_device_bond(self):
        # 5.9 MHz bare bond, 155 MHz detuning: drive ratio lands near
        # the Bessel inversion of 2.5/5.9
        cal = calibrate_amplitude(TWO_PI * 5.9, TWO_PI * 155.0, TWO_PI * 2.5)
        assert 0.92 < cal.ratio < 0.98
        assert abs(cal.amplitude - cal.ratio * TWO_PI * 155.0) < 1e-9
        # measured rates rise monotonically over the scanned range
        assert np.all(np.diff(cal.rates) > 0)
        assert cal.rates[0] < TWO_PI * 1.0 < TWO_PI * 2.5 < cal.rates[-1]

    def test_unreachable_target_raises(self):
        with pytest.raises(RuntimeError):
            calibrate_amplitude(TWO_PI * 1.0, TWO_PI * 155.0, TWO_PI * 2.5,
                                ratios=np.linspace(0.2, 1.0, 8), n_times=61)

    def test_negative_target_raises(self):
        with pytest.raises(ValueError):
            calibrate_amplitude(TWO_PI * 5.9, TWO_PI * 155.0, -1.0)


class TestCouplingMap:
    def test_device_map(self):
        cmap = effective_coupling_map()
        assert len(cmap) == 24
        for (i, j), rate in cmap.items():
            assert i < j
            if 4 in (i, j):
                # undriven neighbor: no spectator reduction
                assert abs(rate - TWO_PI * 2.5) < TWO_PI * 2.5 * 0.04
            else:
                assert abs(rate - TWO_PI * 1.96) < TWO_PI * 1.96 * 0.03

    def test_seeded_map_is_deterministic(self):
        a = effective_coupling_map(seed=3, n_times=81, t_max=0.3)
        b = effective_coupling_map(seed=3, n_times=81, t_max=0.3)
        assert a == b
        c = effective_coupling_map(seed=4, n_times=81, t_max=0.3)
        assert any(abs(a[k] - c[k]) > 1e-6 for k in a)


class TestDeviceAmplitudes:
    def test_isolated_bond_target(self):
        amps = calibrate_device_amplitudes(
            TWO_PI * 2.5, ratios=[0.85, 0.95, 1.05], n_times=81, t_max=0.3)
        assert set(amps) == set(OWNED_BONDS)
        for owner, amp in amps.items():
            ratio = amp / abs(TWO_PI * MOD_FREQ_MHZ[owner - 1])
            assert 0.90 < ratio < 1.00


class TestPhaseOffsetScan:
    phases = np.linspace(-math.pi, math.pi, 21)

    def test_compensated_loop_reads_near_zero(self):
        scan = phase_offset_scan(0.0, phases=self.phases)
        assert abs(scan.recovered_offset) < 0.1

    def test_injected_offset_recovered(self):
        # second-order drive corrections limit the recovery accuracy to
        # a few hundredths of a radian at full device coupling
        scan = phase_offset_scan(0.6, phases=self.phases)
        assert abs(scan.recovered_offset - 0.6) < 0.15

    def test_weak_coupling_recovers_tighter(self):
        strong = phase_offset_scan(0.0, phases=self.phases)
        weak = phase_offset_scan(0.0, phases=self.phases, j0=TWO_PI * 3.0)
        assert abs(weak.recovered_offset) < 0.04
        assert abs(weak.recovered_offset) < abs(strong.recovered_offset)
