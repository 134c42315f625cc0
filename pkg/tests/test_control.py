import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiactive import (
    ActuationMode,
    ControllerKind,
    ControllerSpec,
    PdGains,
    SimState,
    ValidationError,
    actuate,
    mr_force,
)
from semiactive.control import (
    desired_force,
    groundhook_force,
    pd_skygroundhook_force,
    skygroundhook_force,
    skyhook_force,
)

vel = st.floats(min_value=-3, max_value=3, allow_nan=False)


class TestSpec:
    def test_published_gains(self):
        assert ControllerSpec.published("skyhook").c_sky == 17000
        assert ControllerSpec.published("groundhook").c_gr == 4000
        sgh = ControllerSpec.published(ControllerKind.SKYGROUNDHOOK)
        assert (sgh.c_sky, sgh.c_gr, sgh.c_passive) == (25500, 1150, 0)
        assert ControllerSpec.published("pd_skygroundhook").pd == PdGains(7400, 5600, 440, 50)

    def test_labels(self):
        assert [k.label for k in ControllerKind] == [
            "Passive", "Skyhook", "Groundhook", "Skygroundhook", "PD-Skygroundhook"
        ]

    def test_negative_gain(self):
        with pytest.raises(ValidationError, match="c_sky"):
            ControllerSpec(ControllerKind.SKYHOOK, c_sky=-1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ControllerSpec("fuzzy")


class TestLaws:
    def test_skyhook(self):
        assert skyhook_force(0.1, 0.2, 17000.0) == pytest.approx(-3400.0)
        assert skyhook_force(0.1, -0.2, 17000.0) == 0.0
        assert skyhook_force(0.0, 0.2, 17000.0) == 0.0

    def test_groundhook(self):
        assert groundhook_force(0.2, -0.1, 4000.0) == pytest.approx(400.0)
        assert groundhook_force(0.2, 0.1, 4000.0) == 0.0
        assert groundhook_force(0.0, 0.1, 4000.0) == 0.0

    def test_skygroundhook(self):
        assert skygroundhook_force(0.1, -0.05, 0.15, 25500, 1150, 1500) == pytest.approx(-2492.5)
        assert skygroundhook_force(0.1, 0.2, -0.1, 25500, 1150, 1500) == pytest.approx(150.0)
        assert skygroundhook_force(0.0, 0.0, 0.0, 25500, 1150, 1500) == 0.0

    def test_pd(self, gains):
        assert pd_skygroundhook_force(0.1, 1.0, 0.0, 0.0, gains) == pytest.approx(-6340.0)
        assert pd_skygroundhook_force(0.0, 0.0, 0.0, 0.0, gains) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(vel, vel, vel, vel)
    def test_zero_gain_pd_is_silent(self, v_s, a_s, v_u, a_u):
        assert pd_skygroundhook_force(v_s, a_s, v_u, a_u, PdGains.zero()) == 0.0

    @settings(max_examples=300, deadline=None)
    @given(vel, vel)
    def test_hook_switching_surfaces(self, v_s, v_u):
        v_rel = v_s - v_u
        sky = skyhook_force(v_s, v_rel, 17000.0)
        assert sky == (-17000.0 * v_rel if v_s * v_rel > 0 else 0.0)
        ground = groundhook_force(v_u, v_rel, 4000.0)
        assert ground == (-4000.0 * v_rel if v_u * v_rel < 0 else 0.0)

    def test_non_finite(self, gains):
        with pytest.raises(ValidationError):
            skyhook_force(math.nan, 0.1, 1.0)
        with pytest.raises(ValidationError):
            pd_skygroundhook_force(0.0, math.inf, 0.0, 0.0, gains)

    def test_dispatch(self, damper, gains):
        s = SimState(v_s=0.1, v_u=-0.05, x=1e-4)
        assert desired_force(ControllerSpec.published("skyhook"), s, damper) == skyhook_force(0.1, s.v_rel, 17000)
        assert desired_force(ControllerSpec.published("groundhook"), s, damper) == groundhook_force(-0.05, s.v_rel, 4000)
        pd = ControllerSpec.published("pd_skygroundhook")
        assert desired_force(pd, s, damper, 1.0, -2.0) == pd_skygroundhook_force(0.1, 1.0, -0.05, -2.0, gains)
        # the passive law is the damper at zero volts
        assert desired_force(ControllerSpec(), s, damper) == mr_force(s.v_rel, 0.0, 1e-4, 0.0, damper)


class TestActuate:
    def test_semi_active_floor(self, damper):
        for v_rel in (-0.3, 0.05, 1.2):
            cmd = actuate(0.0, SimState(v_s=v_rel), damper)
            assert cmd.voltage == 0.0 and cmd.saturated
            assert cmd.f_realized == pytest.approx(-damper.c_oa * v_rel)
            assert cmd.f_desired == 0.0

    def test_inversion_round_trip(self, damper):
        s = SimState(v_s=0.3, v_u=0.1, x=2e-5)
        f = mr_force(0.2, 0.0, 2e-5, 3.0, damper)
        cmd = actuate(f, s, damper)
        assert cmd.voltage == pytest.approx(3.0, abs=1e-12)
        assert cmd.f_realized == pytest.approx(f, rel=1e-12)
        assert not cmd.saturated

    def test_clamp_guard(self, damper):
        cmd = actuate(-500.0, SimState(v_s=1e-8), damper, ActuationMode.CLAMP)
        assert cmd.f_realized == 0.0

    def test_clamp_realizes_viscous_force(self, damper):
        cmd = actuate(-2000.0, SimState(v_s=0.5), damper, "clamp")
        assert cmd.f_realized == pytest.approx(-2000.0)
        # reported voltage reproduces the realized force
        assert mr_force(0.5, 0.0, 0.0, cmd.voltage, damper) == pytest.approx(-2000.0)

    def test_custom_ceiling(self, damper):
        cmd = actuate(-20000.0, SimState(v_s=0.5), damper, "clamp", c_max=1000.0)
        assert cmd.f_realized == pytest.approx(-500.0)

    def test_semi_active_constraint(self, damper, rng):
        for _ in range(2000):
            v_s, v_u = rng.uniform(-1, 1, 2)
            f = rng.uniform(-20000, 20000)
            clamp = actuate(f, SimState(v_s=v_s, v_u=v_u, x=rng.uniform(-1e-4, 1e-4)), damper, "clamp")
            assert clamp.f_realized * (v_s - v_u) <= 0.0
            assert 0.0 <= clamp.voltage <= damper.v_max
            inv = actuate(f, SimState(v_s=v_s, v_u=v_u), damper, "inversion")
            assert inv.f_realized * (v_s - v_u) <= 0.0
            assert 0.0 <= inv.voltage <= damper.v_max

    def test_non_finite(self, damper):
        with pytest.raises(ValidationError):
            actuate(math.nan, SimState(), damper)
