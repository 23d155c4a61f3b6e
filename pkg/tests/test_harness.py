"""Tests for the seeded Monte-Carlo sweep harness and its summaries."""

import math

import numpy as np
import pytest

from modrec import (ChannelConfig, ExperimentConfig, ModulationClass, TrialRecord,
                    TrialSet, apply_awgn, apply_fading, batch_features,
                    build_constellation, build_fading_profile, calibrate,
                    collect_feature_cells, confusion, draw_symbols, pcc_curve,
                    rescore, run_sweep, table1_thresholds, trial_seed)

SEED = 7


def _config(**kw):
    base = dict(classes=(4, 16), snr_grid_db=(0.0, 10.0), n_trials_per_class=2,
                frame_length=64, master_seed=SEED)
    base.update(kw)
    return ExperimentConfig(**base)


class TestExperimentConfig:
    """Validation and normalization of sweep parameters."""

    def test_defaults(self):
        cfg = ExperimentConfig()
        assert [c.order for c in cfg.classes] == [4, 8, 16, 32, 64, 128, 256, 512, 1024]
        assert cfg.snr_grid_db == tuple(float(s) for s in range(-5, 21))
        assert cfg.n_trials_per_class == 500
        assert cfg.frame_length == 4096
        assert cfg.phase_offset == pytest.approx(math.pi / 6)
        assert cfg.channel.kind == "awgn_only"
        assert cfg.thresholds.provenance == "paper_table1"
        assert cfg.fusion == "plurality"
        assert cfg.master_seed == 0

    def test_int_classes_coerced(self):
        cfg = _config(classes=(64, 1024))
        assert all(isinstance(c, ModulationClass) for c in cfg.classes)

    def test_rejects_duplicate_classes(self):
        with pytest.raises(ValueError, match="duplicate"):
            _config(classes=(4, 4))

    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError, match="nonempty"):
            _config(snr_grid_db=())

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError, match="n_trials_per_class"):
            _config(n_trials_per_class=0)

    def test_rejects_short_frame(self):
        with pytest.raises(ValueError, match="frame_length"):
            _config(frame_length=4)

    def test_rejects_unknown_fusion(self):
        with pytest.raises(ValueError, match="fusion"):
            _config(fusion="and")

    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError, match="master_seed"):
            _config(master_seed=-1)


class TestTrialSeed:
    """Per-trial seed derivation."""

    def test_deterministic(self):
        a = trial_seed(SEED, 1, 2, 3).generate_state(4)
        b = trial_seed(SEED, 1, 2, 3).generate_state(4)
        np.testing.assert_array_equal(a, b)

    def test_distinct_coordinates_distinct_streams(self):
        base = trial_seed(SEED, 1, 2, 3).generate_state(4)
        for coords in [(0, 2, 3), (1, 0, 3), (1, 2, 0)]:
            other = trial_seed(SEED, *coords).generate_state(4)
            assert not np.array_equal(base, other)


class TestRunSweep:
    """Record counting, ordering, and reproducibility."""

    def test_record_count_and_order(self):
        """2 classes x 2 SNRs x 2 trials in (class, snr, trial) nesting."""
        tset = run_sweep(_config())
        assert len(tset.records) == 8
        assert [r.seed for r in tset.records] == [
            (1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1),
            (3, 0, 0), (3, 0, 1), (3, 1, 0), (3, 1, 1)]
        assert [r.true_class.order for r in tset.records] == [4] * 4 + [16] * 4
        assert [r.snr_db for r in tset.records] == [0.0, 0.0, 10.0, 10.0] * 2

    def test_run_twice_is_identical(self):
        a = run_sweep(_config())
        b = run_sweep(_config())
        for ra, rb in zip(a.records, b.records):
            assert np.array_equal(ra.features, rb.features)
            assert ra.per_feature_index == rb.per_feature_index
            assert ra.fused_class == rb.fused_class

    def test_workers_do_not_change_results(self):
        a = run_sweep(_config(), workers=1)
        b = run_sweep(_config(), workers=2)
        for ra, rb in zip(a.records, b.records):
            assert np.array_equal(ra.features, rb.features)
            assert ra.seed == rb.seed

    def test_trial_reproducible_in_isolation_awgn(self):
        """A stored trial is rebuilt from its seed triple alone; the fading
        child is derived (and discarded) even on a pure AWGN channel."""
        cfg = _config()
        rec = run_sweep(cfg).records[5]
        ci, si, ti = rec.seed
        sym_seed, _fade_seed, noise_seed = trial_seed(cfg.master_seed, ci, si, ti).spawn(3)
        spec = build_constellation(rec.true_class.order, cfg.phase_offset)
        frame = draw_symbols(spec, cfg.frame_length, sym_seed)
        frame = apply_awgn(frame, rec.snr_db, spec.average_power, noise_seed)
        feats = batch_features(frame.samples[np.newaxis, :])[0]
        assert np.array_equal(feats, rec.features)

    def test_trial_reproducible_in_isolation_fading(self):
        """Same rebuild through the Rician path."""
        cfg = _config(channel=ChannelConfig(kind="rician", snr_db=None))
        rec = run_sweep(cfg).records[2]
        ci, si, ti = rec.seed
        sym_seed, fade_seed, noise_seed = trial_seed(cfg.master_seed, ci, si, ti).spawn(3)
        spec = build_constellation(rec.true_class.order, cfg.phase_offset)
        frame = draw_symbols(spec, cfg.frame_length, sym_seed)
        frame = apply_fading(frame, build_fading_profile(cfg.channel), cfg.channel,
                             fade_seed)
        frame = apply_awgn(frame, rec.snr_db, spec.average_power, noise_seed)
        feats = batch_features(frame.samples[np.newaxis, :])[0]
        assert np.array_equal(feats, rec.features)

    def test_symbol_stream_shared_across_channel_kinds(self):
        """The same trial uses the same symbol child seed whether or not the
        channel fades, so noiseless AWGN output is the fading run's input."""
        awgn = _config(snr_grid_db=(math.inf,)).__class__
        cfg_a = _config(snr_grid_db=(math.inf,))
        cfg_f = _config(snr_grid_db=(math.inf,),
                        channel=ChannelConfig(kind="rayleigh"))
        rec_a = run_sweep(cfg_a).records[0]
        ci, si, ti = rec_a.seed
        sym_seed, fade_seed, _ = trial_seed(cfg_f.master_seed, ci, si, ti).spawn(3)
        spec = build_constellation(4, cfg_f.phase_offset)
        frame = draw_symbols(spec, cfg_f.frame_length, sym_seed)
        faded = apply_fading(frame, build_fading_profile(cfg_f.channel),
                             cfg_f.channel, fade_seed)
        rec_f = run_sweep(cfg_f).records[0]
        feats = batch_features(faded.samples[np.newaxis, :])[0]
        assert np.array_equal(feats, rec_f.features)

    def test_frequency_offset_changes_features(self):
        plain = run_sweep(_config())
        shifted = run_sweep(_config(freq_offset=0.01))
        assert not np.array_equal(plain.records[0].features,
                                  shifted.records[0].features)

    def test_trial_set_count_validation(self):
        cfg = _config()
        tset = run_sweep(cfg)
        with pytest.raises(ValueError, match="expected 8 records"):
            TrialSet(cfg, tset.records[:-1])


class TestCollectFeatureCells:
    """Calibration cells reuse the sweep pipeline and its seeds."""

    def test_keys_and_shapes(self):
        cfg = _config()
        cells = collect_feature_cells(cfg)
        assert set(cells) == {(4, 0.0), (4, 10.0), (16, 0.0), (16, 10.0)}
        assert all(v.shape == (2, 4) for v in cells.values())

    def test_matches_run_sweep_features(self):
        cfg = _config()
        cells = collect_feature_cells(cfg)
        tset = run_sweep(cfg)
        for rec in tset.records:
            cell = cells[(rec.true_class.order, rec.snr_db)]
            assert np.array_equal(cell[rec.seed[2]], rec.features)


def _toy_trialset(fused_flags, oracle_flags, orders=(4, 16)):
    """A 2-class, 1-SNR trial set with prescribed hit patterns per class."""
    table = table1_thresholds().__class__(np.tile([1.0, 2.0], (4, 1)), orders)
    cfg = ExperimentConfig(classes=orders, snr_grid_db=(5.0,),
                           n_trials_per_class=len(fused_flags[0]),
                           frame_length=64, master_seed=0, thresholds=table)
    records = []
    for k, mod in enumerate(cfg.classes):
        other = cfg.classes[1 - k]
        for t, (good, orac) in enumerate(zip(fused_flags[k], oracle_flags[k])):
            fused = mod if good else (None if good is None else other)
            records.append(TrialRecord(mod, 5.0, np.zeros(4), (1, 1, 1, 1),
                                       fused, orac, (mod.class_index, 0, t)))
    return TrialSet(cfg, tuple(records))


class TestPccCurve:
    """PCC arithmetic under both scoring rules."""

    def test_uniform_prior_average(self):
        """Per-class accuracies 0.5 and 1.0 average to 0.75."""
        tset = _toy_trialset([[True, False], [True, True]],
                             [[True, True], [True, True]])
        curve = pcc_curve(tset, "plurality")
        point = curve.points[0]
        assert point.snr_db == 5.0
        assert point.per_class_pcc == (0.5, 1.0)
        assert point.pcc == pytest.approx(0.75)
        assert pcc_curve(tset, "oracle_or").points[0].pcc == 1.0

    def test_reject_counts_as_error(self):
        tset = _toy_trialset([[None, True], [True, True]],
                             [[False, True], [True, True]])
        assert pcc_curve(tset, "plurality").points[0].per_class_pcc == (0.5, 1.0)

    def test_unknown_scoring_rejected(self):
        tset = _toy_trialset([[True], [True]], [[True], [True]])
        with pytest.raises(ValueError, match="scoring"):
            pcc_curve(tset, "unanimous")

    def test_empty_cell_rejected(self):
        """A grid SNR with no matching records is an error, not a zero."""
        cfg = ExperimentConfig(classes=(4, 16), snr_grid_db=(5.0, 6.0),
                               n_trials_per_class=1, frame_length=64)
        records = tuple(
            TrialRecord(mod, 5.0, np.zeros(4), (1, 1, 1, 1), mod, True,
                        (mod.class_index, 0, 0))
            for mod in cfg.classes for _ in range(2))[:4]
        tset = TrialSet(cfg, records)
        with pytest.raises(ValueError, match="no trials"):
            pcc_curve(tset, "plurality")

    def test_oracle_or_dominates_plurality_on_real_sweep(self):
        tset = run_sweep(_config(n_trials_per_class=10))
        plur = pcc_curve(tset, "plurality")
        orac = pcc_curve(tset, "oracle_or")
        for p, o in zip(plur.points, orac.points):
            assert o.pcc >= p.pcc


@pytest.fixture(scope="module")
def calibrated_sweep():
    cfg = ExperimentConfig(classes=(4, 16), snr_grid_db=(30.0,),
                           n_trials_per_class=100, frame_length=1024,
                           master_seed=SEED)
    table = calibrate(collect_feature_cells(cfg))
    cfg = ExperimentConfig(classes=(4, 16), snr_grid_db=(30.0,),
                           n_trials_per_class=100, frame_length=1024,
                           master_seed=SEED, thresholds=table)
    return run_sweep(cfg)


class TestEndToEndCalibrated:
    """Self-calibrated sweep at high SNR classifies perfectly."""

    def test_perfect_pcc(self, calibrated_sweep):
        assert pcc_curve(calibrated_sweep, "plurality").points[0].pcc == 1.0
        assert pcc_curve(calibrated_sweep, "oracle_or").points[0].pcc == 1.0

    def test_confusion_is_identity(self, calibrated_sweep):
        mat = confusion(calibrated_sweep, 30.0)
        np.testing.assert_array_equal(mat, np.hstack([np.eye(2), np.zeros((2, 1))]))


class TestConfusion:
    """Confusion matrix layout and normalization."""

    def test_rows_sum_to_one(self):
        tset = run_sweep(_config(n_trials_per_class=10))
        mat = confusion(tset, 10.0)
        np.testing.assert_allclose(mat.sum(axis=1), 1.0, rtol=1e-12)
        assert mat.shape == (2, 10)

    def test_reject_column(self):
        """Rejected trials land in the trailing column."""
        tset = _toy_trialset([[None, None], [True, True]],
                             [[False, False], [True, True]])
        mat = confusion(tset, 5.0)
        assert mat.shape == (2, 3)
        assert mat[0, 2] == 1.0
        assert mat[1, 1] == 1.0

    def test_unknown_snr_rejected(self):
        tset = run_sweep(_config())
        with pytest.raises(ValueError, match="not present"):
            confusion(tset, 3.0)


class TestRescore:
    """Re-classifying stored features under another table."""

    def test_same_table_is_identity(self):
        tset = run_sweep(_config())
        again = rescore(tset, table1_thresholds())
        for a, b in zip(tset.records, again.records):
            assert a.per_feature_index == b.per_feature_index
            assert a.fused_class == b.fused_class
            assert a.oracle_or_hit == b.oracle_or_hit

    def test_features_survive_unchanged(self):
        tset = run_sweep(_config())
        shifted = np.array(table1_thresholds().phi) + 0.1
        again = rescore(tset, table1_thresholds().__class__(shifted))
        for a, b in zip(tset.records, again.records):
            assert np.array_equal(a.features, b.features)

    def test_config_carries_new_table(self):
        tset = run_sweep(_config())
        shifted = table1_thresholds().__class__(np.array(table1_thresholds().phi) + 0.1)
        again = rescore(tset, shifted)
        assert again.config.thresholds is shifted
        assert tset.config.thresholds.provenance == "paper_table1"
