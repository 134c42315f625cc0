import math
from dataclasses import replace

import numpy as np
import pytest

from semiactive import BoucWenParams, ControllerSpec, DivergenceError, SimState, ValidationError, VehicleParams
from semiactive.road import Bump, Flat, Sine
from semiactive.sim import (
    TRAJECTORY_COLUMNS,
    SimConfig,
    Trajectory,
    compute_metrics,
    energy_monitor,
    frequency_response,
    modal_peaks,
    natural_frequencies_hz,
    percent_reduction,
    simulate,
    step,
    storage_function,
)

KINDS = ["passive", "skyhook", "groundhook", "skygroundhook", "pd_skygroundhook"]


def synthetic(columns: dict, n: int, t_end: float = 1.0) -> Trajectory:
    data = np.zeros((n, 13))
    data[:, 0] = np.linspace(0.0, t_end, n)
    for name, values in columns.items():
        data[:, TRAJECTORY_COLUMNS.index(name)] = values
    return Trajectory(data, SimConfig(dt=t_end / (n - 1), t_end=t_end, plant_mode="implicit"))


class TestConfig:
    def test_lengths(self):
        cfg = SimConfig(t_end=1.0, record_stride=3)
        assert cfg.n_steps == 1000
        assert len(simulate(cfg)) == 1000 // 3 + 1

    @pytest.mark.parametrize(
        "kwargs", [{"dt": 0.0}, {"t_end": 1e-4}, {"record_stride": 0}, {"substeps": -1}, {"c_max": 0.0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            SimConfig(**kwargs)

    def test_coarse_explicit_warns(self):
        with pytest.warns(RuntimeWarning, match="stiff"):
            SimConfig(dt=2e-3)


class TestStep:
    def test_rk4_harness(self):
        # a free mass on a dashpot to ground reduces to v' = -v
        veh = VehicleParams(m_s=1.0, m_u=1e300, c_s=1.0, k_s=1e-300, k_t=1e-300)
        cfg = SimConfig(dt=0.1, t_end=0.1, plant_mode="implicit", vehicle=veh,
                        damper=BoucWenParams(c_oa=0.0), road=Flat())
        new, _ = step(SimState(v_s=1.0), 0.0, cfg)
        assert new.v_s == pytest.approx(0.90483750, abs=5e-9)
        assert new.v_s == pytest.approx(1 - 0.1 + 0.1**2 / 2 - 0.1**3 / 6 + 0.1**4 / 24, rel=1e-14)

    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("mode", ["explicit", "implicit"])
    def test_equilibrium(self, kind, mode):
        cfg = SimConfig(plant_mode=mode, controller=ControllerSpec.published(kind), road=Flat(), t_end=0.5)
        new, diag = step(SimState(), 0.0, cfg)
        assert new.as_array().tolist() == [0.0] * 5
        assert diag.f_realized == 0.0
        assert not np.any(simulate(cfg).data[:, 1:12])

    def test_matches_simulate(self):
        cfg = SimConfig(controller=ControllerSpec.published("pd_skygroundhook"), t_end=1.2)
        traj = simulate(cfg)
        state, acc = SimState(), (0.0, 0.0)
        for k in range(1200):
            state, diag = step(state, k * cfg.dt, cfg, acc)
            acc = diag.next_acc
        np.testing.assert_array_equal(state.as_array(), traj.data[-1, 1:6])

    def test_divergence_names_time(self):
        cfg = SimConfig(road=Flat(), plant_mode="implicit")
        with pytest.raises(DivergenceError) as err:
            step(SimState(z_s=1e307, v_s=1e307), 0.25, cfg)
        assert err.value.t == 0.25 and err.value.dt == cfg.dt
        assert "0.25" in str(err.value)

    def test_substeps_follow_speed(self, damper):
        cfg = SimConfig(road=Flat())
        _, slow = step(SimState(), 0.0, cfg)
        _, fast = step(SimState(v_s=1.0), 0.0, cfg)
        assert slow.substeps == 1
        assert fast.substeps == math.ceil(cfg.dt * (damper.q + damper.b) * 1.0)
        _, fixed = step(SimState(v_s=1.0), 0.0, replace(cfg, substeps=7))
        assert fixed.substeps == 7


class TestSimulate:
    def test_order_four(self):
        def final(dt):
            cfg = SimConfig(dt=dt, t_end=2.0, plant_mode="implicit", road=Bump(), substeps=1)
            return simulate(cfg).data[-1, 1:5]

        ref = final(1e-3 / 64)
        dts = np.array([4e-3, 2e-3, 1e-3, 5e-4])
        errs = np.array([np.max(np.abs(final(d) - ref)) for d in dts])
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert slope >= 3.7

    def test_deterministic(self):
        cfg = SimConfig(controller=ControllerSpec.published("skygroundhook"))
        assert simulate(cfg).data.tobytes() == simulate(cfg).data.tobytes()

    def test_zero_road_metrics(self):
        m = compute_metrics(simulate(SimConfig(road=Flat(), t_end=1.0)))
        assert all(v == 0.0 for v in m.to_dict().values())

    def test_bump_peak_travel_window(self):
        cfg = SimConfig(road=Bump(0.05, 1.0, 1.5))
        traj = simulate(cfg)
        travel = np.abs(traj.z_s - traj.z_u)
        t_peak = traj.t[int(np.argmax(travel))]
        assert travel.max() > 0.0
        assert 1.0 <= t_peak <= 3.5

    def test_records_are_finite_and_read_only(self):
        traj = simulate(SimConfig(controller=ControllerSpec.published("pd_skygroundhook")))
        assert np.all(np.isfinite(traj.data))
        with pytest.raises(ValueError):
            traj.data[0, 0] = 1.0

    def test_csv_export(self, tmp_path):
        traj = simulate(SimConfig(t_end=0.01))
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(TRAJECTORY_COLUMNS)
        assert len(lines) == len(traj) + 1
        back = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_array_equal(back, traj.data[:, :12])


class TestMetrics:
    def test_constant(self):
        m = compute_metrics(synthetic({"a_s": np.full(101, -3.0)}, 101))
        assert m.rms_a_s == 3.0

    def test_sine_rms(self):
        t = np.linspace(0.0, 4 * np.pi, 20001)
        m = compute_metrics(synthetic({"a_s": np.sin(t)}, t.size, t_end=4 * np.pi))
        assert m.rms_a_s == pytest.approx(1 / math.sqrt(2), abs=1e-3)

    def test_units(self, vehicle):
        m = compute_metrics(synthetic({"z_s": np.full(11, 0.003), "z_u": np.full(11, 0.001)}, 11))
        assert m.peak_travel == pytest.approx(2.0)
        assert m.peak_tire_load == pytest.approx(vehicle.k_t * 0.001)

    def test_skip(self):
        values = np.r_[np.full(50, 10.0), np.full(51, 1.0)]
        traj = synthetic({"a_s": values}, 101)
        assert compute_metrics(traj, skip=0.5).rms_a_s == 1.0
        with pytest.raises(ValidationError):
            compute_metrics(traj, skip=2.0)

    @pytest.mark.parametrize("base,cand,expected", [(2.0, 1.0, 50.0), (0.7, 0.7, 0.0), (1.0, 1.5, -50.0)])
    def test_percent_reduction(self, base, cand, expected):
        assert percent_reduction(base, cand) == pytest.approx(expected)

    @pytest.mark.parametrize("base", [0.0, -1.0, math.nan])
    def test_percent_reduction_baseline(self, base):
        with pytest.raises(ValidationError):
            percent_reduction(base, 1.0)


class TestEnergy:
    def test_zero(self, vehicle):
        assert energy_monitor(simulate(SimConfig(road=Flat(), t_end=0.5)), vehicle) == 0.0

    def test_beta_zero_is_mechanical(self, vehicle):
        traj = simulate(SimConfig(road=Bump(), t_end=2.0))
        mech = 0.5 * (vehicle.m_s * traj.v_s**2 + vehicle.m_u * traj.v_u**2
                      + vehicle.k_s * (traj.z_s - traj.z_u) ** 2 + vehicle.k_t * (traj.z_u - traj.z_r) ** 2)
        np.testing.assert_allclose(storage_function(traj, vehicle, beta=0.0), mech, rtol=1e-15)
        assert np.all(storage_function(traj, vehicle, beta=1.0) >= mech)

    @pytest.mark.parametrize("mode", ["explicit", "implicit"])
    def test_unforced_decay(self, vehicle, mode):
        cfg = SimConfig(road=Flat(), plant_mode=mode, t_end=3.0, initial_state=SimState(z_s=0.05, z_u=0.01))
        traj = simulate(cfg)
        v0 = storage_function(traj, vehicle)[0]
        assert energy_monitor(traj, vehicle) <= 1e-6 * v0


class TestFrequency:
    def test_modal_peaks(self):
        # light damping so each resonance stands clear of its neighbour
        cfg = SimConfig(plant_mode="implicit", vehicle=VehicleParams(c_s=300.0), damper=BoucWenParams(c_oa=0.0))
        freqs = np.geomspace(0.5, 15.0, 41)
        resp = frequency_response(cfg, freqs)
        for peak in modal_peaks(resp, natural_frequencies_hz(cfg)):
            j = int(np.flatnonzero(freqs == peak.peak_hz)[0])
            lo, hi = freqs[max(j - 1, 0)], freqs[min(j + 1, freqs.size - 1)]
            assert lo <= peak.natural_hz <= hi

    def test_linearity(self):
        cfg = SimConfig(damper=BoucWenParams(alpha_a=0.0), substeps=200)
        freqs = [0.8, 1.25, 4.0, 11.0]
        one = frequency_response(cfg, freqs, amplitude=0.01, cycles_settle=5, cycles_measure=3)
        two = frequency_response(cfg, freqs, amplitude=0.02, cycles_settle=5, cycles_measure=3)
        np.testing.assert_allclose(two.rms_a_s, 2 * one.rms_a_s, rtol=1e-6)
        np.testing.assert_allclose(two.rms_a_u, 2 * one.rms_a_u, rtol=1e-6)

    def test_zero_amplitude(self):
        cfg = SimConfig(controller=ControllerSpec.published("pd_skygroundhook"))
        resp = frequency_response(cfg, [1.0, 10.0], amplitude=0.0, cycles_settle=2, cycles_measure=2)
        assert not np.any(resp.rms_a_s) and not np.any(resp.rms_a_u)

    @pytest.mark.parametrize("freqs", [[], [1.0, 0.5], [0.0, 1.0]])
    def test_bad_grid(self, freqs):
        with pytest.raises(ValidationError):
            frequency_response(SimConfig(), freqs)

    def test_natural_frequencies_hz(self):
        f1, f2 = natural_frequencies_hz(SimConfig())
        assert f1 == pytest.approx(1.24903, abs=1e-5)
        assert f2 == pytest.approx(10.98367, abs=1e-5)
