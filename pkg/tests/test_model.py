import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiactive import (
    PdGains,
    SimState,
    SingularMatrixError,
    ValidationError,
    VehicleParams,
    coupled_accelerations,
    natural_frequencies,
    passive_accelerations,
)
from semiactive.model import mass_matrix_det

positive = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False, allow_infinity=False)
nonneg = st.floats(min_value=0.0, max_value=1e5, allow_nan=False, allow_infinity=False)


def random_state(rng):
    return SimState(*rng.uniform(-0.1, 0.1, 4), float(rng.uniform(-1e-3, 1e-3)))


class TestParams:
    def test_defaults(self, vehicle):
        assert (vehicle.m_s, vehicle.m_u, vehicle.c_s, vehicle.k_s, vehicle.k_t) == (320, 45, 1500, 22000, 192000)

    @pytest.mark.parametrize("field", ["m_s", "m_u", "c_s", "k_s", "k_t"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_vehicle_rejects_non_positive(self, field, bad):
        with pytest.raises(ValidationError, match=field):
            VehicleParams(**{field: bad})

    @pytest.mark.parametrize("field", ["p_sky", "d_sky", "p_gr", "d_gr"])
    def test_gains_reject_negative(self, field):
        with pytest.raises(ValidationError, match=field):
            PdGains(**{field: -1.0})

    def test_gains_zero(self):
        assert PdGains.zero().as_array().tolist() == [0, 0, 0, 0]

    @pytest.mark.parametrize("field", ["z_s", "z_u", "v_s", "v_u", "x"])
    def test_state_must_be_finite(self, field):
        with pytest.raises(ValidationError):
            SimState(**{field: math.nan})

    def test_state_relative_quantities(self):
        s = SimState(z_s=0.3, z_u=0.1, v_s=1.0, v_u=0.25)
        assert s.z_rel == pytest.approx(0.2)
        assert s.v_rel == 0.75
        assert SimState.from_array(s.as_array()) == s


class TestPassive:
    def test_equilibrium(self, vehicle):
        assert passive_accelerations(SimState(), vehicle, 0.0, 0.0) == (0.0, 0.0)

    def test_displaced_body(self, vehicle):
        a_s, a_u = passive_accelerations(SimState(z_s=0.01), vehicle, 0.0, 0.0)
        assert a_s == pytest.approx(-0.6875, abs=1e-12)
        assert a_u == pytest.approx(220.0 / 45.0, abs=1e-12)

    def test_moving_body(self, vehicle):
        a_s, a_u = passive_accelerations(SimState(v_s=0.1), vehicle, 0.0, 0.0)
        assert a_s == pytest.approx(-0.46875, abs=1e-12)
        assert a_u == pytest.approx(150.0 / 45.0, abs=1e-12)

    def test_damper_force_is_internal(self, vehicle):
        # +f on the body, -f on the wheel
        a_s, a_u = passive_accelerations(SimState(), vehicle, 0.0, 100.0)
        assert a_s == pytest.approx(100.0 / 320.0)
        assert a_u == pytest.approx(-100.0 / 45.0)

    @pytest.mark.parametrize("z_r,f", [(math.nan, 0.0), (0.0, math.inf)])
    def test_non_finite_inputs(self, vehicle, z_r, f):
        with pytest.raises(ValidationError):
            passive_accelerations(SimState(), vehicle, z_r, f)

    def test_internal_forces_cancel(self, vehicle, rng):
        # total momentum rate only sees the tire
        for _ in range(500):
            s = random_state(rng)
            z_r, f = rng.uniform(-0.05, 0.05), rng.uniform(-5000, 5000)
            a_s, a_u = passive_accelerations(s, vehicle, z_r, f)
            total = vehicle.m_s * a_s + vehicle.m_u * a_u
            assert total == pytest.approx(-vehicle.k_t * (s.z_u - z_r), rel=1e-9, abs=1e-9)


class TestCoupled:
    def test_reference_solve(self, vehicle, gains):
        assert mass_matrix_det(vehicle, gains) == 282400.0
        a_s, a_u = coupled_accelerations(SimState(v_s=0.1), vehicle, gains, 0.0, 0.0)
        assert a_s == pytest.approx(-40050.0 / 282400.0, abs=1e-12)
        assert a_s == pytest.approx(-0.141820, abs=1e-6)
        assert a_u == pytest.approx(1.008499, abs=1e-6)

    def test_solution_satisfies_system(self, vehicle, gains, rng):
        A = np.array([[vehicle.m_s + gains.d_sky, -gains.d_gr], [-gains.d_sky, vehicle.m_u + gains.d_gr]])
        for _ in range(200):
            s = random_state(rng)
            z_r, f = rng.uniform(-0.05, 0.05), rng.uniform(-3000, 3000)
            f_s = -vehicle.k_s * s.z_rel - vehicle.c_s * s.v_rel
            b = np.array([
                f_s + f - gains.p_sky * s.v_s + gains.p_gr * s.v_u,
                vehicle.k_t * (z_r - s.z_u) - f_s - f + gains.p_sky * s.v_s - gains.p_gr * s.v_u,
            ])
            acc = np.array(coupled_accelerations(s, vehicle, gains, z_r, f))
            np.testing.assert_allclose(A @ acc, b, rtol=1e-10, atol=1e-8)

    def test_zero_gains_match_passive(self, vehicle, rng):
        zero = PdGains.zero()
        for _ in range(1000):
            s = random_state(rng)
            z_r = rng.uniform(-0.05, 0.05)
            assert coupled_accelerations(s, vehicle, zero, z_r) == pytest.approx(
                passive_accelerations(s, vehicle, z_r, 0.0), rel=1e-14, abs=1e-12
            )

    def test_non_finite(self, vehicle, gains):
        with pytest.raises(ValidationError):
            coupled_accelerations(SimState(), vehicle, gains, math.nan)

    def test_singular_guard(self, gains):
        # unreachable with validated masses, so fake a massless plant
        p = SimpleNamespace(m_s=1e-300, m_u=1e-300, c_s=1.0, k_s=1.0, k_t=1.0)
        with pytest.raises(SingularMatrixError):
            coupled_accelerations(SimState(), p, PdGains(0, 0, 0, 0), 0.0)

    @settings(max_examples=1000, deadline=None)
    @given(positive, positive, nonneg, nonneg)
    def test_det_expansion(self, m_s, m_u, d_sky, d_gr):
        p = VehicleParams(m_s=m_s, m_u=m_u)
        g = PdGains(1.0, d_sky, 1.0, d_gr)
        big = (m_s + d_sky) * (m_u + d_gr)
        assert mass_matrix_det(p, g) == pytest.approx(big - d_gr * d_sky, abs=1e-12 * big)
        assert mass_matrix_det(p, g) > 0.0


class TestModal:
    def test_reference_vehicle(self, vehicle):
        w1, w2 = natural_frequencies(vehicle)
        assert w1 == pytest.approx(7.85, abs=0.01)
        assert w2 == pytest.approx(69.01, abs=0.01)

    def test_decoupled_wheel(self):
        p = SimpleNamespace(m_s=1.0, m_u=1.0, k_s=0.0, k_t=4.0)
        assert natural_frequencies(p) == (0.0, 2.0)

    @settings(max_examples=300, deadline=None)
    @given(positive, positive, positive, positive)
    def test_roots_solve_quartic(self, m_s, m_u, k_s, k_t):
        p = VehicleParams(m_s=m_s, m_u=m_u, k_s=k_s, k_t=k_t)
        w1, w2 = natural_frequencies(p)
        assert 0.0 < w1 <= w2
        for w in (w1, w2):
            # scale each term so the check is relative to the largest one
            terms = [w**4 * m_s * m_u, -(w**2) * (k_s * m_u + k_s * m_s + k_t * m_s), k_s * k_t]
            assert abs(sum(terms)) <= 1e-6 * max(abs(t) for t in terms)
