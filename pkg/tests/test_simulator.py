"""Room sampling, geometry, image-method RIRs, rendering, and the manifest."""
import numpy as np
import pytest
from scipy.signal import fftconvolve

from gccdoa.errors import ConfigurationError
from gccdoa.simulator import (CATEGORIES, CATEGORY_BOUNDS, KERNEL_HALF,
                              WALL_CLEARANCE, RoomSpec, Scenario, image_rir,
                              pair_doa, place_pair_and_source, random_scenario,
                              read_manifest, render, sample_room,
                              scenario_from_json, scenario_to_json,
                              speech_like_source, stream_rng, write_manifest)

RATE = 16000


class _PinnedRng:
    """Duck-typed generator whose uniform() always returns the low bound."""

    def uniform(self, lo, hi):
        return lo


class TestSampleRoom:
    def test_pinned_low_gives_category_minimum(self):
        assert sample_room("small", _PinnedRng()) == pytest.approx([5.0, 5.0, 3.0])

    def test_large_rooms_have_fixed_footprint(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            dims = sample_room("large", rng)
            assert dims[0] == 20.0 and dims[1] == 20.0
            assert 5.0 <= dims[2] <= 10.0

    def test_bounds_respected_and_approached(self):
        rng = np.random.default_rng(1)
        draws = np.array([sample_room("small", rng) for _ in range(10000)])
        for axis, (lo, hi) in enumerate(CATEGORY_BOUNDS["small"]):
            assert draws[:, axis].min() >= lo and draws[:, axis].max() <= hi
            assert draws[:, axis].min() < lo + 0.05 * (hi - lo)
            assert draws[:, axis].max() > hi - 0.05 * (hi - lo)

    def test_unknown_category_rejected(self):
        with pytest.raises(ConfigurationError):
            sample_room("gigantic", np.random.default_rng(0))


class TestGeometry:
    def test_broadside_source_is_zero(self):
        assert pair_doa([0, 0, 0], [0.05, 0, 0], [0.025, 3.0, 0]) == pytest.approx(0.0, abs=1e-12)

    def test_endfire_source_is_quarter_turn(self):
        theta = pair_doa([0, 0, 0], [0.05, 0, 0], [1.0, 0, 0])
        assert theta == pytest.approx(np.pi / 2, abs=1e-9)

    def test_swapping_mics_negates_doa(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a, b = rng.uniform(0, 1, 3), rng.uniform(0, 1, 3)
            s = rng.uniform(2, 5, 3)
            assert pair_doa(a, b, s) == pytest.approx(-pair_doa(b, a, s), abs=1e-12)

    def test_placement_invariants(self):
        rng = np.random.default_rng(3)
        room = RoomSpec(dims=(6.0, 7.0, 3.5), beta=0.0)
        for _ in range(200):
            mic_a, mic_b, source, theta0 = place_pair_and_source(room, 0.05, rng)
            assert np.linalg.norm(mic_b - mic_a) == pytest.approx(0.05, abs=1e-9)
            for point in (mic_a, mic_b, source):
                assert np.all(point >= WALL_CLEARANCE - 1e-9)
                assert np.all(point <= np.array(room.dims) - WALL_CLEARANCE + 1e-9)
            assert -np.pi / 2 <= theta0 <= np.pi / 2

    def test_too_small_room_rejected(self):
        room = RoomSpec(dims=(0.9, 0.9, 0.9), beta=0.0)
        with pytest.raises(ConfigurationError):
            place_pair_and_source(room, 0.05, np.random.default_rng(0))

    def test_bad_beta_rejected(self):
        with pytest.raises(ConfigurationError):
            RoomSpec(dims=(5.0, 5.0, 3.0), beta=1.0)


class TestImageRir:
    def test_free_field_single_arrival(self):
        room = RoomSpec(dims=(8.0, 9.0, 4.0), beta=0.0)
        source = np.array([2.0, 3.0, 1.5])
        # place the mic so the direct path is exactly 100 samples
        dist = 100 * 343.0 / RATE
        mic = source + np.array([dist, 0.0, 0.0])
        h = image_rir(room, source, mic, RATE)
        peak = np.argmax(np.abs(h))
        assert peak == 100
        assert h[peak] == pytest.approx(1.0 / (4 * np.pi * dist), rel=1e-6)
        # all energy concentrated within the kernel span of the arrival
        outside = np.concatenate([h[: peak - KERNEL_HALF], h[peak + KERNEL_HALF + 1:]])
        assert np.max(np.abs(outside)) < 1e-12

    def test_fractional_delay_centers_energy(self):
        room = RoomSpec(dims=(8.0, 9.0, 4.0), beta=0.0)
        source = np.array([2.0, 3.0, 1.5])
        dist = 100.37 * 343.0 / RATE
        mic = source + np.array([dist, 0.0, 0.0])
        h = image_rir(room, source, mic, RATE)
        lags = np.arange(len(h))
        centroid = np.sum(lags * h * h) / np.sum(h * h)
        assert centroid == pytest.approx(100.37, abs=0.2)

    def test_reverberant_energy_grows_with_beta(self):
        room_a = RoomSpec(dims=(6.0, 5.0, 3.0), beta=0.3)
        room_b = RoomSpec(dims=(6.0, 5.0, 3.0), beta=0.6)
        source, mic = [2.0, 2.5, 1.4], [4.0, 3.0, 1.6]
        e_a = np.sum(image_rir(room_a, source, mic, RATE) ** 2)
        e_b = np.sum(image_rir(room_b, source, mic, RATE) ** 2)
        e_0 = np.sum(image_rir(RoomSpec(dims=(6.0, 5.0, 3.0), beta=0.0), source, mic, RATE) ** 2)
        assert e_b > e_a > e_0

    def test_outside_positions_rejected(self):
        room = RoomSpec(dims=(5.0, 5.0, 3.0), beta=0.0)
        with pytest.raises(ConfigurationError):
            image_rir(room, [6.0, 1.0, 1.0], [1.0, 1.0, 1.0], RATE)
        with pytest.raises(ConfigurationError):
            image_rir(room, [1.0, 1.0, 1.0], [1.0, -0.1, 1.0], RATE)


class TestSpeechLikeSource:
    def test_unit_power_and_finite(self):
        x = speech_like_source(1.0, RATE, np.random.default_rng(4))
        assert np.all(np.isfinite(x))
        assert np.mean(x * x) == pytest.approx(1.0, rel=1e-9)
        assert len(x) == RATE

    def test_spectral_centroid_is_low(self):
        x = speech_like_source(2.0, RATE, np.random.default_rng(5))
        spec = np.abs(np.fft.rfft(x))
        freqs = np.fft.rfftfreq(len(x), 1 / RATE)
        centroid = np.sum(freqs * spec) / np.sum(spec)
        assert centroid < RATE / 4

    def test_seeds_differ_but_share_envelope(self):
        x1 = speech_like_source(3.0, RATE, np.random.default_rng(6))
        x2 = speech_like_source(3.0, RATE, np.random.default_rng(7))
        assert not np.allclose(x1, x2)
        edges = [125, 250, 500, 1000, 2000, 4000]
        freqs = np.fft.rfftfreq(len(x1), 1 / RATE)
        for lo, hi in zip(edges[:-1], edges[1:]):
            band = (freqs >= lo) & (freqs < hi)
            p1 = np.mean(np.abs(np.fft.rfft(x1))[band] ** 2)
            p2 = np.mean(np.abs(np.fft.rfft(x2))[band] ** 2)
            assert abs(10 * np.log10(p1 / p2)) < 3.0

    def test_bad_duration_rejected(self):
        with pytest.raises(ConfigurationError):
            speech_like_source(0.0, RATE, np.random.default_rng(0))


def _tiny_scenario(beta=0.0, snr_db=None, seed=(77,)):
    room = RoomSpec(dims=(6.0, 5.0, 3.5), beta=beta)
    return Scenario(room=room, mic_a=(2.0, 2.0, 1.5), mic_b=(2.05, 2.0, 1.5),
                    source=(2.025, 4.0, 1.5), theta0=0.0, snr_db=snr_db, seed=seed)


class TestRender:
    def test_noise_free_is_pure_convolution(self):
        sc = _tiny_scenario()
        rng = np.random.default_rng(8)
        sig = rng.standard_normal(4000)
        pair = render(sc, sig, RATE, length=1024)
        h1 = image_rir(sc.room, sc.source, sc.mic_a, RATE, 1024)
        assert pair.ch1 == pytest.approx(fftconvolve(sig, h1), abs=1e-12)
        assert len(pair.ch1) == len(pair.ch2) == 4000 + 1024 - 1

    def test_snr_zero_balances_powers(self):
        sc = _tiny_scenario(snr_db=0.0)
        sig = speech_like_source(1.0, RATE, np.random.default_rng(9))
        clean = render(_tiny_scenario(snr_db=None, seed=sc.seed), sig, RATE, length=1024)
        noisy = render(sc, sig, RATE, length=1024)
        for ch_n, ch_c in ((noisy.ch1, clean.ch1), (noisy.ch2, clean.ch2)):
            p_sig = np.mean(ch_c**2)
            p_noise = np.mean((ch_n - ch_c) ** 2)
            assert abs(10 * np.log10(p_sig / p_noise)) < 0.1

    def test_rendering_is_deterministic(self):
        sc = _tiny_scenario(snr_db=20.0)
        sig = speech_like_source(0.5, RATE, np.random.default_rng(10))
        a = render(sc, sig, RATE, length=512)
        b = render(sc, sig, RATE, length=512)
        assert np.array_equal(a.ch1, b.ch1) and np.array_equal(a.ch2, b.ch2)

    def test_silent_source_rejected(self):
        with pytest.raises(ConfigurationError):
            render(_tiny_scenario(), np.zeros(1000), RATE)

    def test_broadside_pair_correlates_at_zero_lag(self):
        sc = _tiny_scenario()  # source on the bisector plane, beta = 0
        sig = speech_like_source(0.5, RATE, np.random.default_rng(11))
        pair = render(sc, sig, RATE, length=1024)
        corr = fftconvolve(pair.ch1, pair.ch2[::-1])
        lag = np.argmax(corr) - (len(pair.ch2) - 1)
        assert abs(lag) <= 1


class TestRandomScenario:
    def test_deterministic_and_complete(self):
        a = random_scenario(0.3, 25.0, 0.05, (42, 0))
        b = random_scenario(0.3, 25.0, 0.05, (42, 0))
        assert a == b
        assert a.room.beta == 0.3 and a.snr_db == 25.0
        assert np.linalg.norm(np.subtract(a.mic_b, a.mic_a)) == pytest.approx(0.05, abs=1e-9)

    def test_different_seeds_differ(self):
        assert random_scenario(0.0, None, 0.05, (42, 0)) != random_scenario(0.0, None, 0.05, (42, 1))

    def test_all_categories_appear(self):
        vols = []
        for i in range(60):
            sc = random_scenario(0.0, None, 0.05, (9, i))
            vols.append(np.prod(sc.room.dims))
        vols = np.array(vols)
        # small rooms are < 500 m^3, large ones >= 2000 m^3
        assert np.sum(vols < 500) > 0
        assert np.sum(vols > 2000) > 0

    def test_stream_rngs_are_independent(self):
        a = stream_rng((5, 1), 0).standard_normal(4)
        b = stream_rng((5, 1), 1).standard_normal(4)
        assert not np.allclose(a, b)


class TestManifest:
    def test_json_round_trip(self):
        sc = random_scenario(0.6, 15.0, 0.05, (3, 14))
        assert scenario_from_json(scenario_to_json(sc)) == sc

    def test_file_round_trip(self, tmp_path):
        scenarios = [random_scenario(0.0, None, 0.05, (4, i)) for i in range(5)]
        path = tmp_path / "scenarios.jsonl"
        write_manifest(scenarios, path)
        assert read_manifest(path) == scenarios

    def test_null_snr_survives(self):
        sc = _tiny_scenario(snr_db=None)
        assert scenario_from_json(scenario_to_json(sc)).snr_db is None
