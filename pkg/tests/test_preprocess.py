import numpy as np
import pytest

from augscore.errors import DegenerateChannel, StatsMismatch
from augscore.preprocess import (
    ChannelStats,
    compute_p99,
    invert_deviation_to_uint16,
    load_stats,
    quantize_bundle,
    quantize_to_uint8,
    save_stats,
)
from augscore.raster import MaskRect, TimeSeries, TimeSeriesBundle, extract_signature
from augscore.scoring import score_noaug

from conftest import constant_series, make_image


def one_image_bundle(samples):
    image = make_image(np.asarray(samples, dtype=np.uint16), day=0)
    second = make_image(np.asarray(samples, dtype=np.uint16) + 0, day=1)
    series = TimeSeries(id="s", images=(image, second), mask=MaskRect(0, 0, 1))
    return TimeSeriesBundle(series=(series,))


class TestComputeP99:
    def test_nearest_rank_on_1_to_100(self):
        # pooled over two identical images: 200 samples, rank ceil(0.99*200)=198
        # -> the 99th largest of the duplicated 1..100 is 99
        values = np.arange(1, 101, dtype=np.uint16).reshape(1, 10, 10)
        stats = compute_p99(one_image_bundle(values))
        assert stats.p99[0] == 99.0

    def test_single_image_rank(self):
        # 100 samples, rank ceil(0.99*100) = 99 -> value 99
        values = np.arange(1, 101, dtype=np.uint16).reshape(1, 10, 10)
        img = make_image(values, day=0)
        img2 = make_image(np.full((1, 10, 10), 1, dtype=np.uint16), day=1)
        series = TimeSeries(id="s", images=(img, img2), mask=MaskRect(0, 0, 1))
        stats = compute_p99(TimeSeriesBundle(series=(series,)))
        # pooled n=200: 1..100 plus 100 ones -> 198th order statistic = 98
        assert stats.p99[0] == 98.0

    def test_constant_channel(self):
        stats = compute_p99(one_image_bundle(np.full((1, 5, 5), 500, dtype=np.uint16)))
        assert stats.p99[0] == 500.0

    def test_all_zero_channel(self):
        with pytest.raises(DegenerateChannel):
            compute_p99(one_image_bundle(np.zeros((1, 5, 5), dtype=np.uint16)))

    def test_stats_reject_non_positive(self):
        with pytest.raises(DegenerateChannel):
            ChannelStats(p99=np.array([100.0, 0.0]))


class TestQuantize:
    def _quantize_single(self, value, p99):
        img = make_image(np.full((1, 2, 2), value, dtype=np.uint16))
        out = quantize_to_uint8(img, ChannelStats(p99=np.array([float(p99)])))
        assert out.domain == "uint8"
        return int(out.samples[0, 0, 0])

    def test_half_away_rounding(self):
        # 255 * 1000/2000 = 127.5 rounds up
        assert self._quantize_single(1000, 2000) == 128

    def test_clipping(self):
        assert self._quantize_single(4000, 2000) == 255

    def test_zero_maps_to_zero(self):
        assert self._quantize_single(0, 2000) == 0

    def test_monotone_per_channel(self, rng):
        p99 = ChannelStats(p99=np.array([3000.0]))
        values = np.sort(rng.integers(0, 65536, size=64)).astype(np.uint16)
        img = make_image(values.reshape(1, 8, 8))
        out = quantize_to_uint8(img, p99).samples.ravel()
        assert np.all(np.diff(out.astype(int))[np.diff(values.astype(int)) >= 0] >= 0)

    def test_channel_count_must_match(self):
        img = make_image(np.zeros((2, 2, 2), dtype=np.uint16))
        with pytest.raises(StatsMismatch):
            quantize_to_uint8(img, ChannelStats(p99=np.array([100.0])))

    def test_uint8_input_rejected(self):
        img = make_image(np.zeros((1, 2, 2), dtype=np.uint8))
        with pytest.raises(StatsMismatch):
            quantize_to_uint8(img, ChannelStats(p99=np.array([100.0])))


class TestInvertDeviation:
    def test_uniform_scaling(self):
        stats = ChannelStats(p99=np.full(3, 2550.0))
        assert invert_deviation_to_uint16(np.full(3, 10.0), stats) == 100.0

    def test_zero(self):
        stats = ChannelStats(p99=np.array([123.0, 456.0]))
        assert invert_deviation_to_uint16(np.zeros(2), stats) == 0.0

    def test_per_band_rescale(self):
        # hand evaluation: (10 * 255/255 + 20 * 510/255) / 2 = (10 + 40) / 2 = 25
        stats = ChannelStats(p99=np.array([255.0, 510.0]))
        assert invert_deviation_to_uint16(np.array([10.0, 20.0]), stats) == 25.0

    def test_against_quantize_diff_invert_on_constants(self):
        # reference route: constant uint16 images -> quantize -> signature
        # diff -> invert; values sit on the quantization grid so the result
        # must be the uint16 difference exactly
        stats = ChannelStats(p99=np.array([255.0, 510.0]))
        lo = constant_series([[10, 40], [20, 80]], k=2, dtype=np.uint16)
        quantized = quantize_bundle(TimeSeriesBundle(series=(lo,)), stats)
        sig0 = extract_signature(quantized.series[0].images[0], lo.mask).values
        sig1 = extract_signature(quantized.series[0].images[1], lo.mask).values
        diffs = np.abs(sig0 - sig1)
        # quantized values: [10, 20] and [20, 40] -> diffs [10, 20]
        assert diffs.tolist() == [10.0, 20.0]
        assert invert_deviation_to_uint16(diffs, stats) == 25.0

    def test_length_mismatch(self):
        stats = ChannelStats(p99=np.array([255.0]))
        with pytest.raises(StatsMismatch):
            invert_deviation_to_uint16(np.array([1.0, 2.0]), stats)

    def test_uniform_p99_is_global_rescale(self, rng):
        p99 = 1234.0
        stats = ChannelStats(p99=np.full(4, p99))
        diffs = rng.uniform(0, 50, size=4)
        expected = float(np.mean(diffs)) * (p99 / 255.0)
        assert invert_deviation_to_uint16(diffs, stats) == pytest.approx(expected, rel=1e-12)


class TestRoundTripBound:
    """Quantize -> deviation -> invert against raw uint16 deviations."""

    def _bundle_and_truth(self, rng, residues):
        p99 = 2550.0  # multiple of 255: one uint8 step is 10 uint16 units
        step = p99 / 255.0
        table = (rng.integers(0, 255, size=(6, 2)) * 10 + residues).astype(np.uint16)
        series = constant_series(table, k=2, dtype=np.uint16)
        bundle = TimeSeriesBundle(series=(series,))
        stats = ChannelStats(p99=np.full(2, p99))
        return bundle, stats, table, step

    def _max_error(self, bundle, stats, table):
        quantized = quantize_bundle(bundle, stats)
        result = score_noaug(quantized, stats)
        worst = 0.0
        for record in result.records:
            truth_row = table[record.tau].astype(np.float64)
            others = np.delete(table.astype(np.float64), record.tau, axis=0)
            true_d = np.abs(truth_row - others).mean(axis=1).min()
            worst = max(worst, abs(record.d_u16 - true_d))
        return worst

    def test_half_step_bound_near_grid(self, rng):
        # residues < step/2 keep every per-value rounding error in (-1/2, 0],
        # so differences of two roundings stay within half a step
        bundle, stats, table, step = self._bundle_and_truth(
            rng, rng.integers(0, 5, size=(6, 2))
        )
        assert self._max_error(bundle, stats, table) <= 0.5 * step + 1e-9

    def test_full_step_bound_anywhere(self, rng):
        # arbitrary residues: the two independent roundings can disagree by
        # up to one full step
        bundle, stats, table, step = self._bundle_and_truth(
            rng, rng.integers(0, 10, size=(6, 2))
        )
        assert self._max_error(bundle, stats, table) <= 1.0 * step + 1e-9


def test_stats_file_round_trip(tmp_path):
    stats = ChannelStats(p99=np.array([123.0, 456.5]))
    save_stats(stats, tmp_path / "stats.json")
    loaded = load_stats(tmp_path / "stats.json")
    np.testing.assert_array_equal(loaded.p99, stats.p99)
