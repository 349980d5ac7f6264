import numpy as np
import pytest
from numpy.testing import assert_allclose

from repmarket.errors import (
    ConcavityViolation,
    DomainError,
    ParseError,
    ValidationError,
)
from repmarket.h2curve import (
    PiecewiseConcaveCurve,
    SampledHydrogenCurve,
    fit_piecewise_concave,
    uniform_breakpoints,
)


class TestFit:
    def test_quadratic_fit_values(self, quad_sample):
        """Chord fit of -0.01p^2 + 25p on {0, 250, 500}."""
        fit = fit_piecewise_concave(quad_sample, breakpoints=(0.0, 250.0, 500.0))
        assert_allclose(fit.slopes, [22.5, 17.5])
        assert_allclose(fit.intercepts, [0.0, 1250.0])
        assert fit.value(250.0) == pytest.approx(5625.0)
        assert fit.value(400.0) == pytest.approx(8250.0)
        assert fit.capacity_mw == 500.0

    def test_fit_exact_at_breakpoints(self, concave_sample_factory):
        rng = np.random.default_rng(7)
        for _ in range(50):
            sample = concave_sample_factory(rng, capacity=rng.uniform(100, 900))
            pieces = int(rng.integers(1, 6))
            fit = fit_piecewise_concave(sample, pieces=pieces)
            for bp in fit.breakpoints:
                assert fit.value(bp) == pytest.approx(sample.interpolate(bp), rel=1e-12)

    def test_fit_never_above_concave_data(self, concave_sample_factory):
        rng = np.random.default_rng(8)
        for _ in range(20):
            sample = concave_sample_factory(rng)
            fit = fit_piecewise_concave(sample, pieces=4)
            grid = np.linspace(0.0, sample.capacity_mw, 200)
            for p in grid:
                assert fit.value(p) <= sample.interpolate(p) + 1e-9

    def test_default_breakpoints_are_uniform(self, quad_sample):
        fit = fit_piecewise_concave(quad_sample, pieces=4)
        assert_allclose(fit.breakpoints, [0.0, 125.0, 250.0, 375.0, 500.0])

    def test_convex_data_rejected(self):
        powers = np.linspace(0.0, 100.0, 11)
        sample = SampledHydrogenCurve(tuple(powers), tuple(0.01 * powers**2))
        with pytest.raises(ConcavityViolation):
            fit_piecewise_concave(sample, pieces=4)

    def test_breakpoints_must_span_capacity(self, quad_sample):
        with pytest.raises(ValidationError):
            fit_piecewise_concave(quad_sample, breakpoints=(0.0, 400.0))
        with pytest.raises(ValidationError):
            fit_piecewise_concave(quad_sample, breakpoints=(100.0, 500.0))


class TestPiecewiseConcaveCurve:
    def test_evaluate_and_piece_lookup(self, two_piece_curve):
        c = two_piece_curve
        assert c.value(0.0) == 0.0
        assert c.value(100.0) == 2000.0
        assert c.value(250.0) == 5000.0  # both pieces agree here
        assert c.value(400.0) == 16.0 * 400 + 1000.0
        assert c.piece_index(100.0) == 0
        assert c.piece_index(250.0) == 1  # right-hand piece at the boundary
        assert c.piece_index(500.0) == 1

    def test_domain_checked(self, two_piece_curve):
        with pytest.raises(DomainError):
            two_piece_curve.value(-1.0)
        with pytest.raises(DomainError):
            two_piece_curve.value(500.1)

    def test_slope_order_enforced(self):
        with pytest.raises(ConcavityViolation):
            PiecewiseConcaveCurve(
                slopes=(16.0, 20.0),
                intercepts=(0.0, -1000.0),
                breakpoints=(0.0, 250.0, 500.0),
            )

    def test_continuity_enforced(self):
        with pytest.raises(ValidationError):
            PiecewiseConcaveCurve(
                slopes=(20.0, 16.0),
                intercepts=(0.0, 0.0),
                breakpoints=(0.0, 250.0, 500.0),
            )

    def test_zero_power_means_zero_output(self):
        with pytest.raises(ValidationError):
            PiecewiseConcaveCurve(
                slopes=(20.0,), intercepts=(5.0,), breakpoints=(0.0, 500.0)
            )

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            PiecewiseConcaveCurve(
                slopes=(20.0,), intercepts=(0.0, 1.0), breakpoints=(0.0, 1.0)
            )

    def test_csv_round_trip(self, two_piece_curve, tmp_path):
        path = tmp_path / "fit.csv"
        two_piece_curve.to_csv(path)
        back = PiecewiseConcaveCurve.from_csv(path)
        assert back == two_piece_curve


class TestSampledCurve:
    def test_interpolate_hits_samples(self, quad_sample):
        assert quad_sample.interpolate(250.0) == pytest.approx(5625.0)
        assert quad_sample.interpolate(0.0) == 0.0

    def test_scaled_preserves_specific_output(self, quad_sample):
        big = quad_sample.scaled(1000.0)
        assert big.capacity_mw == pytest.approx(1000.0)
        assert big.interpolate(500.0) == pytest.approx(2 * quad_sample.interpolate(250.0))

    def test_validation(self):
        with pytest.raises(ValidationError):
            SampledHydrogenCurve((0.0,), (0.0,))
        with pytest.raises(ValidationError):
            SampledHydrogenCurve((10.0, 20.0), (0.0, 1.0))  # must start at 0
        with pytest.raises(ValidationError):
            SampledHydrogenCurve((0.0, 10.0, 10.0), (0.0, 1.0, 2.0))
        with pytest.raises(ValidationError):
            SampledHydrogenCurve((0.0, 10.0), (0.0, -1.0))
        with pytest.raises(ValidationError):
            SampledHydrogenCurve((0.0, 10.0), (1.0, 2.0))  # h(0) must be 0
        with pytest.raises(ValidationError):
            SampledHydrogenCurve((0.0, 10.0, 20.0), (0.0, 5.0, 4.0))

    def test_csv_round_trip(self, quad_sample, tmp_path):
        path = tmp_path / "sample.csv"
        quad_sample.to_csv(path)
        back = SampledHydrogenCurve.from_csv(path)
        assert back == quad_sample

    def test_csv_parse_errors(self, tmp_path):
        bad_header = tmp_path / "h.csv"
        bad_header.write_text("power,h2\n0,0\n")
        with pytest.raises(ParseError):
            SampledHydrogenCurve.from_csv(bad_header)

        bad_value = tmp_path / "v.csv"
        bad_value.write_text("power_mw,h2_kg_per_h\n0,0\nten,5\n")
        with pytest.raises(ParseError, match=":3"):
            SampledHydrogenCurve.from_csv(bad_value)

        empty = tmp_path / "e.csv"
        empty.write_text("power_mw,h2_kg_per_h\n")
        with pytest.raises(ParseError):
            SampledHydrogenCurve.from_csv(empty)


def test_uniform_breakpoints():
    assert uniform_breakpoints(500.0, 4) == (0.0, 125.0, 250.0, 375.0, 500.0)
    with pytest.raises(ValidationError):
        uniform_breakpoints(500.0, 0)
    with pytest.raises(ValidationError):
        uniform_breakpoints(-1.0, 3)
