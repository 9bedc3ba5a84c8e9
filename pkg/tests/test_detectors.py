from __future__ import annotations

import numpy as np
import pytest

from pmfspace.detection.detectors import (
    DetectorConfig,
    detect_batch,
    detect_etb,
    detect_map,
    detect_mimo,
    detect_mmse,
    detect_tb,
)
from pmfspace.detection.mimo import MimoProblem, mimo_app, random_mimo
from pmfspace.detection.sim import SimConfig, ber_csv, draw_trials, sigma2_for, simulate_ber
from pmfspace.errors import DetectionFailure, DimensionMismatch
from pmfspace.joint import marginals_brute


def _batch(seed, n_b, nr, nt, snr_db):
    return draw_trials(seed, snr_db, 0, n_b, nt, nr)


class TestMap:
    def test_matches_brute_marginals(self, rng):
        p, _ = random_mimo(rng, 2, 2, 0.8)
        _, llr = detect_mimo(p, "map")
        ref = marginals_brute(mimo_app(p))
        np.testing.assert_allclose(llr, [np.log(m.probs[0] / m.probs[1]) for m in ref], atol=1e-9)

    def test_low_ber_at_high_snr(self):
        hc, bits, y, s2 = _batch(1, 500, 2, 2, 20.0)
        res = detect_map(hc, y, s2)
        assert np.mean(res.bits != bits) < 1e-2

    def test_size_limit(self):
        with pytest.raises(ValueError):
            detect_map(np.ones((1, 9, 9)), np.ones((1, 9)), 1.0)


class TestTrellisDetectors:
    def test_noiseless_limit(self):
        hc, bits, y, s2 = _batch(2, 50, 4, 4, 60.0)
        for det in (detect_etb, detect_map, detect_mmse):
            assert (det(hc, y, s2).bits == bits).all()

    def test_tb_error_floor(self):
        # the plain tail-biting detector keeps a floor even without noise
        hc, bits, y, s2 = _batch(2, 200, 4, 4, 60.0)
        wrong = (detect_tb(hc, y, s2).bits != bits).any(axis=1).mean()
        assert 0 < wrong < 0.15

    def test_tb_close_to_map_2x2(self):
        hc, _, y, s2 = _batch(3, 200, 2, 2, 8.0)
        tb = detect_tb(hc, y, s2, DetectorConfig(max_iter=200, tol=1e-8))
        ref = detect_map(hc, y, s2)
        ok = tb.iterations < 200
        assert ok.mean() > 0.9
        assert np.mean(tb.bits[ok] == ref.bits[ok]) > 0.99

    def test_etb_no_worse_than_tb(self):
        hc, bits, y, s2 = _batch(4, 400, 4, 4, 14.0)
        tb = detect_tb(hc, y, s2)
        etb = detect_etb(hc, y, s2)
        assert np.sum(etb.bits != bits) <= np.sum(tb.bits != bits)

    def test_etb_failure_flag(self):
        hc, _, y, s2 = _batch(5, 40, 3, 3, 10.0)
        res = detect_etb(hc, y, s2, DetectorConfig(max_iter=1, tol=1e-12))
        assert res.failures.all()
        assert np.isfinite(res.llr).all()

    def test_detection_failure_carries_partial(self):
        hc, _, y, s2 = _batch(5, 1, 3, 3, 10.0)
        p = MimoProblem(hc[0], y[0], s2)
        with pytest.raises(DetectionFailure) as exc:
            detect_mimo(p, "etb", DetectorConfig(max_iter=1, tol=1e-12))
        bits, llr = exc.value.partial
        assert bits.shape == llr.shape == (6,)

    def test_max_log(self):
        hc, bits, y, s2 = _batch(6, 100, 4, 4, 20.0)
        res = detect_tb(hc, y, s2, DetectorConfig(max_log=True))
        assert np.mean(res.bits != bits) < 0.05

    def test_mmse_llr_sign(self):
        hc, bits, y, s2 = _batch(7, 300, 4, 4, 16.0)
        res = detect_mmse(hc, y, s2)
        assert np.mean(res.bits != bits) < 0.05

    def test_validation(self):
        with pytest.raises(ValueError):
            detect_batch(np.ones((1, 2, 2)), np.ones((1, 2)), 1.0, "zf")
        with pytest.raises(DimensionMismatch):
            detect_tb(np.ones((1, 2, 2)), np.ones((1, 3)), 1.0)
        with pytest.raises(ValueError):
            detect_tb(np.ones((1, 2, 2)), np.ones((1, 2)), 0.0)


class TestSimulation:
    def test_sigma2(self):
        assert sigma2_for(0.0, 8) == pytest.approx(2.0)
        assert sigma2_for(10.0, 4) == pytest.approx(0.1)

    def test_trial_streams_independent_of_grouping(self):
        whole = draw_trials(9, 12.0, 0, 10, 3, 3)
        parts = [draw_trials(9, 12.0, a, a + 5, 3, 3) for a in (0, 5)]
        for k in range(3):
            np.testing.assert_array_equal(whole[k], np.concatenate([p[k] for p in parts]))

    def test_deterministic_across_workers(self):
        base = dict(nt=3, nr=3, snr_db=(6.0, 12.0), bits=1200, detector="tb", chunk=7)
        runs = [ber_csv(simulate_ber(SimConfig(workers=w, **base))) for w in (1, 3)]
        assert runs[0] == runs[1]

    def test_bit_count(self):
        cfg = SimConfig(nt=4, nr=4, bits=100, detector="mmse")
        assert cfg.trials == 13
        assert simulate_ber(cfg)[0].bits == 104

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimConfig(detector="zf")
        with pytest.raises(ValueError):
            SimConfig(nt=1, detector="tb")
        with pytest.raises(ValueError):
            SimConfig(snr_db=())
        with pytest.raises(ValueError):
            SimConfig(tol=0)

    def test_csv(self):
        pts = simulate_ber(SimConfig(nt=2, nr=2, snr_db=(5.0,), bits=400, detector="map"))
        lines = ber_csv(pts).splitlines()
        assert lines[0] == "snr_db,detector,bits,errors,ber,mean_iterations,failures"
        assert lines[1].startswith("5,map,400,")
