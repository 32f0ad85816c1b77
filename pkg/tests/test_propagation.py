import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifiloc.model import AccessPoint, PathLossParams, Point2D, Rect
from lifiloc.propagation import (
    EnvironmentField,
    derive_exponent,
    distance_from_rssi,
    fit_exponent_least_squares,
    rssi_from_distance,
    sample_environment,
)

LOC1 = PathLossParams(p0=26.0, d0=1.0, n=0.3338)


class TestForwardModel:
    def test_table1_twenty_meter_row(self):
        assert rssi_from_distance(LOC1, 20.0) == pytest.approx(16.0, abs=0.01)

    def test_reference_distance_returns_p0(self):
        assert rssi_from_distance(LOC1, 1.0) == 26.0

    def test_five_meters(self):
        assert rssi_from_distance(LOC1, 5.0) == pytest.approx(26 - 3.338 * math.log(5), abs=1e-12)
        assert rssi_from_distance(LOC1, 5.0) == pytest.approx(20.63, abs=0.01)

    @pytest.mark.parametrize("d", [0.0, -1.0])
    def test_nonpositive_distance(self, d):
        with pytest.raises(ValueError):
            rssi_from_distance(LOC1, d)


class TestInversion:
    def test_table1_twenty_meter_row(self):
        assert distance_from_rssi(LOC1, 16.0) == pytest.approx(20.0, abs=0.01)

    def test_p0_maps_to_d0(self):
        assert distance_from_rssi(LOC1, 26.0) == 1.0

    def test_five_meter_reading(self):
        assert distance_from_rssi(LOC1, 20.0) == pytest.approx(6.03, abs=0.01)

    @pytest.mark.parametrize("n", [0.0, -0.2])
    def test_nonpositive_exponent(self, n):
        with pytest.raises(ValueError):
            distance_from_rssi(PathLossParams(26.0, 1.0, n), 20.0)


class TestDeriveExponent:
    @pytest.mark.parametrize(
        "p0, px, expected", [(26, 16, 0.3338), (27, 15, 0.4006)]
    )
    def test_table1_values(self, p0, px, expected):
        assert derive_exponent(p0, px, 20.0, 1.0) == pytest.approx(expected, abs=1e-4)

    def test_e_distance(self):
        n = derive_exponent(26, 16, math.e, 1.0)
        assert n == pytest.approx(1.0, abs=1e-15)
        assert not n.clamped

    def test_singular_at_reference_distance(self):
        with pytest.raises(ValueError, match="reference distance"):
            derive_exponent(26, 16, 1.0, 1.0)

    def test_clamping_is_flagged(self):
        n = derive_exponent(26, 26.0, 20.0, 1.0)
        assert n == 0.05 and n.clamped and n.raw == 0.0
        n = derive_exponent(26, -100.0, 20.0, 1.0)
        assert n == 2.0 and n.clamped and n.raw > 2.0
        assert "raw=" in repr(n)


def test_table1_log_base_canary(table1):
    # natural log reproduces the published row; log10 would give ~0.77 for location #1
    published = [0.3338, 0.2337, 0.3004, 0.4006, 0.3004]
    for ds, pub in zip(table1, published):
        n = derive_exponent(ds.p0, ds.rssi_at(20.0), 20.0, 1.0)
        assert round(float(n), 4) == pub
    assert (26 - 16) / (10 * math.log10(20)) == pytest.approx(0.7686, abs=1e-4)


class TestLeastSquares:
    def test_single_sample_matches_closed_form(self):
        assert fit_exponent_least_squares(26, 1.0, [(20, 16)]) == pytest.approx(0.3338, abs=1e-4)
        assert float(fit_exponent_least_squares(26, 1.0, [(20, 16)])) == float(
            derive_exponent(26, 16, 20, 1.0)
        )

    def test_location1_against_scalar_minimizer(self):
        # frozen from scipy.optimize.minimize_scalar on the squared-residual objective
        expected = 0.3310084573091633
        n = fit_exponent_least_squares(26, 1.0, [(5, 20), (10, 19), (15, 17), (20, 16)])
        assert n == pytest.approx(expected, abs=1e-9)

    def test_location1_live_oracle(self):
        scipy_opt = pytest.importorskip("scipy.optimize")
        samples = [(5, 20), (10, 19), (15, 17), (20, 16)]
        res = scipy_opt.minimize_scalar(
            lambda n: sum((px - (26 - 10 * n * math.log(d))) ** 2 for d, px in samples),
            bounds=(0.01, 3.0),
            method="bounded",
            options={"xatol": 1e-12},
        )
        assert fit_exponent_least_squares(26, 1.0, samples) == pytest.approx(res.x, abs=1e-8)

    def test_exact_samples_recover_exponent(self):
        params = PathLossParams(30.0, 1.0, 0.25)
        samples = [(d, rssi_from_distance(params, d)) for d in (2, 3.5, 7, 12)]
        assert fit_exponent_least_squares(30.0, 1.0, samples) == pytest.approx(0.25, abs=1e-9)

    def test_reference_rows_are_skipped(self):
        assert fit_exponent_least_squares(26, 1.0, [(1, 26), (20, 16)]) == pytest.approx(
            0.33381, abs=1e-5
        )

    def test_no_usable_samples(self):
        with pytest.raises(ValueError, match="no usable"):
            fit_exponent_least_squares(26, 1.0, [(1.0, 26)])
        with pytest.raises(ValueError):
            fit_exponent_least_squares(26, 1.0, [])


class TestSampleEnvironment:
    ap = AccessPoint("ap", Point2D(0.0, 0.0), p0=26.0)

    def test_noiseless_region(self):
        field = EnvironmentField(regions=((Rect(0, -5, 30, 5), 0.3338),), default_n=0.25)
        s = sample_environment(field, self.ap, Point2D(20.0, 0.0))
        assert s.rssi == pytest.approx(16.0, abs=0.01)
        assert s.true_distance == 20.0
        assert s.ap_id == "ap"

    def test_distance_floored_at_d0(self):
        s = sample_environment(EnvironmentField(default_n=0.3), self.ap, Point2D(0.0, 0.0))
        assert s.rssi == 26.0 and s.true_distance == 1.0

    def test_first_matching_region_wins(self):
        field = EnvironmentField(
            regions=((Rect(0, 0, 10, 10), 0.2), (Rect(0, 0, 20, 20), 0.4)), default_n=0.3
        )
        assert field.exponent_at(Point2D(5, 5)) == 0.2
        assert field.exponent_at(Point2D(15, 15)) == 0.4
        assert field.exponent_at(Point2D(25, 25)) == 0.3

    def test_seeded_noise_is_deterministic(self):
        field = EnvironmentField(default_n=0.3, noise_sigma=1.0)
        at = Point2D(3.0, 4.0)
        a = sample_environment(field, self.ap, at, np.random.default_rng(42))
        b = sample_environment(field, self.ap, at, np.random.default_rng(42))
        c = sample_environment(field, self.ap, at, np.random.default_rng(43))
        assert a == b
        assert a != c

    def test_noise_requires_rng(self):
        with pytest.raises(ValueError):
            sample_environment(EnvironmentField(noise_sigma=1.0), self.ap, Point2D(3, 4))

    def test_field_validation(self):
        with pytest.raises(ValueError):
            EnvironmentField(default_n=5.0)
        with pytest.raises(ValueError):
            EnvironmentField(noise_sigma=-1.0)


exponents = st.floats(min_value=0.05, max_value=2.0)
p0s = st.floats(min_value=-100.0, max_value=100.0)
d0s = st.floats(min_value=0.1, max_value=5.0)


@settings(max_examples=300, deadline=None)
@given(p0=p0s, d0=d0s, n=exponents, ratio=st.floats(min_value=1.0 + 1e-6, max_value=1e3))
def test_round_trip(p0, d0, n, ratio):
    params = PathLossParams(p0, d0, n)
    d = d0 * ratio
    assert distance_from_rssi(params, rssi_from_distance(params, d)) == pytest.approx(d, rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(p0=p0s, d0=d0s, n=exponents, ratio=st.floats(min_value=0.01, max_value=1e3))
def test_exponent_recovery(p0, d0, n, ratio):
    if abs(math.log(ratio)) < 1e-3:
        return
    d = d0 * ratio
    px = rssi_from_distance(PathLossParams(p0, d0, n), d)
    assert derive_exponent(p0, px, d, d0) == pytest.approx(n, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(n=exponents, a=st.floats(0.01, 500.0), b=st.floats(0.01, 500.0))
def test_monotone_in_distance(n, a, b):
    if a == b:
        return
    params = PathLossParams(26.0, 1.0, n)
    lo, hi = sorted((a, b))
    assert rssi_from_distance(params, lo) > rssi_from_distance(params, hi)
