import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from rotquant.errors import ArgumentError, DataError, ShapeError
from rotquant.quant import (
    QuantizerSpec,
    dequantize,
    fake_quantize_symmetric,
    quantization_error,
    quantize_asymmetric_grouped,
    quantize_symmetric,
    round_half_away,
)


def spec(bits=2, clip=1.0, granularity="per_tensor", formula="full"):
    return QuantizerSpec(
        bits=bits, clip_ratio=clip, granularity=granularity, level_formula=formula
    )


class TestRounding:
    def test_half_away_from_zero(self):
        x = np.array([0.5, 1.5, -0.5, -1.5, 2.49, -2.49])
        assert round_half_away(x).tolist() == [1.0, 2.0, -1.0, -2.0, 2.0, -2.0]


class TestSymmetric:
    def test_worked_example_full_range(self):
        # b=2, full formula: L = 3, max|X| = 3, scale = 1.
        q = quantize_symmetric([-3.0, 0.0, 1.5], spec(bits=2, clip=1.0))
        assert float(q.scale) == 1.0
        assert q.codes.tolist() == [-3, 0, 2]
        assert dequantize(q).tolist() == [-3.0, 0.0, 2.0]

    def test_worked_example_half_clip(self):
        # clip 0.5 halves the scale; the -3 saturates, the 1.5 is now exact.
        q = quantize_symmetric([-3.0, 0.0, 1.5], spec(bits=2, clip=0.5))
        assert float(q.scale) == 0.5
        assert q.codes.tolist() == [-3, 0, 3]
        assert dequantize(q).tolist() == [-1.5, 0.0, 1.5]

    def test_sixteen_bit_half_bin_bound(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(4096) * 7.3
        q = quantize_symmetric(x, spec(bits=16))
        err = np.abs(dequantize(q) - x).max()
        assert err <= np.abs(x).max() / (2 * (2**16 - 1)) + 1e-15

    def test_all_zero_degenerate(self):
        q = quantize_symmetric(np.zeros((3, 4)), spec(bits=4))
        assert float(q.scale) == 1.0
        assert np.all(q.codes == 0)
        assert np.all(dequantize(q) == 0.0)

    def test_non_finite_rejected(self):
        with pytest.raises(DataError):
            quantize_symmetric([1.0, np.inf], spec())
        with pytest.raises(DataError):
            quantize_symmetric([np.nan], spec())

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            quantize_symmetric([], spec())

    def test_per_token_rows_match_isolated_per_tensor(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((5, 16))
        qt = quantize_symmetric(x, spec(bits=4, granularity="per_token"))
        for i in range(5):
            qi = quantize_symmetric(x[i], spec(bits=4))
            assert float(qt.scale[i]) == float(qi.scale)
            np.testing.assert_array_equal(qt.codes[i], qi.codes)

    def test_per_token_zero_row(self):
        x = np.array([[0.0, 0.0], [1.0, -2.0]])
        q = quantize_symmetric(x, spec(bits=3, granularity="per_token"))
        assert float(q.scale[0]) == 1.0
        np.testing.assert_array_equal(dequantize(q)[0], [0.0, 0.0])

    def test_signed_formula_levels(self):
        assert spec(bits=4, formula="signed").levels == 7
        assert spec(bits=4, formula="full").levels == 15

    def test_asymmetric_spec_rejected(self):
        s = QuantizerSpec(scheme="asymmetric", group_size=2)
        with pytest.raises(ArgumentError):
            quantize_symmetric([1.0], s)


class TestSpecValidation:
    def test_bits_floor(self):
        with pytest.raises(ArgumentError):
            QuantizerSpec(bits=1)

    def test_clip_range(self):
        with pytest.raises(ArgumentError):
            QuantizerSpec(clip_ratio=0.0)
        with pytest.raises(ArgumentError):
            QuantizerSpec(clip_ratio=1.5)

    def test_group_size_only_for_asymmetric(self):
        with pytest.raises(ArgumentError):
            QuantizerSpec(scheme="symmetric", group_size=8)


class TestAsymmetricGrouped:
    def test_ramp_round_trips_exactly(self):
        q = quantize_asymmetric_grouped([0.0, 1.0, 2.0, 3.0], bits=2, group_size=4)
        assert float(q.scale[0]) == 1.0
        assert float(q.zero_point[0]) == 0.0
        assert q.codes.tolist() == [0, 1, 2, 3]
        assert dequantize(q).tolist() == [0.0, 1.0, 2.0, 3.0]

    def test_constant_group_exact(self):
        q = quantize_asymmetric_grouped([5.0, 5.0], bits=3, group_size=2)
        assert dequantize(q).tolist() == [5.0, 5.0]

    def test_constant_non_integer_exact(self):
        q = quantize_asymmetric_grouped([0.3, 0.3, 0.3, 0.3], bits=2, group_size=4)
        np.testing.assert_allclose(dequantize(q), 0.3, rtol=0, atol=1e-15)

    def test_half_bin_bound_per_group(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((4, 256)) * 3.0
        q = quantize_asymmetric_grouped(x, bits=4, group_size=128)
        err = np.abs(dequantize(q) - x)
        grouped = err.reshape(4, 2, 128)
        for i in range(4):
            for g in range(2):
                assert grouped[i, g].max() <= float(q.scale[i, g]) / 2 + 1e-12

    def test_codes_in_range(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(512)
        q = quantize_asymmetric_grouped(x, bits=4, group_size=64)
        assert q.codes.min() >= 0
        assert q.codes.max() <= 15

    def test_indivisible_axis_rejected(self):
        with pytest.raises(ShapeError):
            quantize_asymmetric_grouped(np.ones(10), bits=4, group_size=4)


class TestQuantizationError:
    def test_on_grid_is_zero(self):
        x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        q = quantize_symmetric(x, spec(bits=3, formula="signed"))
        e = quantization_error(x, q)
        assert e.max_abs_err == 0.0
        assert e.mse == 0.0

    def test_worked_example_errors(self):
        x = [-3.0, 0.0, 1.5]
        e1 = quantization_error(x, quantize_symmetric(x, spec(bits=2, clip=1.0)))
        assert e1.max_abs_err == pytest.approx(0.5)
        e2 = quantization_error(x, quantize_symmetric(x, spec(bits=2, clip=0.5)))
        assert e2.max_abs_err == pytest.approx(1.5)

    def test_shape_mismatch(self):
        q = quantize_symmetric(np.ones(4), spec())
        with pytest.raises(ShapeError):
            quantization_error(np.ones(5), q)


finite_arrays = hnp.arrays(
    dtype=np.float64,
    shape=hnp.array_shapes(min_dims=1, max_dims=2, min_side=1, max_side=20),
    elements=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, width=64),
)


class TestProperties:
    @given(finite_arrays, st.integers(min_value=2, max_value=8))
    @settings(max_examples=80, deadline=None)
    def test_half_bin_bound_inside_clip_range(self, x, bits):
        s = spec(bits=bits, clip=1.0)
        q = quantize_symmetric(x, s)
        err = np.abs(dequantize(q) - x)
        # clip 1.0 means nothing saturates, so every element is within
        # half a bin of its reconstruction.
        assert err.max() <= float(q.scale) / 2 + 1e-9 * max(1.0, np.abs(x).max())

    @given(finite_arrays, st.integers(min_value=2, max_value=6))
    @settings(max_examples=60, deadline=None)
    def test_monotone_codes(self, x, bits):
        q = quantize_symmetric(x, spec(bits=bits))
        flat_x = x.ravel()
        flat_c = q.codes.ravel()
        order = np.argsort(flat_x, kind="stable")
        assert np.all(np.diff(flat_c[order]) >= 0)

    @given(finite_arrays)
    @settings(max_examples=40, deadline=None)
    def test_error_shrinks_with_bits(self, x):
        errs = [
            quantization_error(x, quantize_symmetric(x, spec(bits=b))).max_abs_err
            for b in (3, 6, 12)
        ]
        assert errs[0] >= errs[1] >= errs[2]

    @given(finite_arrays, st.sampled_from([0.25, 0.5, 2.0, 4.0]))
    @settings(max_examples=60, deadline=None)
    def test_scale_equivariance_power_of_two(self, x, alpha):
        # Positive scaling leaves codes unchanged and scales the grid; a
        # power-of-two factor keeps the float arithmetic exact.
        qa = quantize_symmetric(x, spec(bits=4))
        qb = quantize_symmetric(alpha * x, spec(bits=4))
        np.testing.assert_array_equal(qa.codes, qb.codes)
        assert float(qb.scale) == float(qa.scale) * alpha or np.abs(x).max() == 0

    @given(st.integers(min_value=2, max_value=10))
    @settings(max_examples=20, deadline=None)
    def test_round_trip_fixed_point(self, bits):
        # A tensor already on the grid is a fixed point of the round trip.
        s = spec(bits=bits)
        rng = np.random.default_rng(bits)
        x = rng.standard_normal(64)
        once = fake_quantize_symmetric(x, s)
        twice = fake_quantize_symmetric(once, s)
        np.testing.assert_allclose(once, twice, rtol=0, atol=1e-12)
