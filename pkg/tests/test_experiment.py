import pytest

from treeaug.experiment import TSV_HEADER, ExperimentReport, SettingRow, checksum, run_experiment, settings_grid
from treeaug.tagger import TaggerConfig

TINY = TaggerConfig(char_embed_dim=4, char_hidden_dim=4, word_embed_dim=4, word_hidden_dim=4, max_epochs=2)


def test_settings_grid_layout():
    grid = settings_grid(["crop", "rotate"], [0.3, 0.7, 1.0])
    assert [name for name, _, _ in grid] == [
        "org", "crop@0.3", "crop@0.7", "crop@1", "rotate@0.3", "rotate@0.7", "rotate@1"]


def test_improvement_pct_exact():
    rows = [SettingRow("org", None, None, accuracies=[0.8]), SettingRow("crop@1", "crop", 1.0, accuracies=[0.9]),
            SettingRow("rotate@1", "rotate", 1.0, accuracies=[0.7])]
    rep = ExperimentReport(rows=rows, seeds=[(0, 0)])
    assert rep.improvement_pct == pytest.approx((0.9 - 0.8) / 0.8 * 100)
    assert rep.best_augmented.setting == "crop@1"


def test_improvement_pct_negative_when_augmentation_hurts():
    rows = [SettingRow("org", None, None, accuracies=[0.8]), SettingRow("crop@1", "crop", 1.0, accuracies=[0.6])]
    assert ExperimentReport(rows=rows, seeds=[]).improvement_pct == pytest.approx(-25.0)


def test_mean_over_runs():
    assert SettingRow("org", None, None, accuracies=[0.5, 0.7]).test_acc == pytest.approx(0.6)


def test_only_org_gives_zero(tiny5):
    rep = run_experiment(tiny5, tiny5, tiny5, ops=(), ps=(), tagger_config=TINY)
    assert len(rep.rows) == 1
    assert rep.improvement_pct == 0.0


def test_seven_rows_and_untouched(tiny5):
    before = checksum(tiny5)
    rep = run_experiment(tiny5, tiny5, tiny5, tagger_config=TINY, aug_seed=3)
    assert len(rep.rows) == 7
    assert all(r.error is None and r.test_acc is not None for r in rep.rows)
    assert rep.untouched and rep.test_checksum_after == before
    tsv = rep.to_tsv().splitlines()
    assert tsv[0].split("\t") == list(TSV_HEADER)
    assert "Imp%" in rep.to_table()


def test_failed_setting_recorded_others_continue(tiny5, monkeypatch):
    import treeaug.experiment as ex

    real = ex.augment_dataset

    def flaky(sents, cfg, workers=1):
        if cfg.operations == ("rotate",):
            raise RuntimeError("boom")
        return real(sents, cfg)

    monkeypatch.setattr(ex, "augment_dataset", flaky)
    rep = run_experiment(tiny5, tiny5, tiny5, ps=(1.0,), tagger_config=TINY)
    status = {r.setting: r.error for r in rep.rows}
    assert status["org"] is None and status["crop@1"] is None
    assert "boom" in status["rotate@1"]
    assert "failed: RuntimeError: boom" in rep.to_tsv()


def test_deterministic_report(tiny5):
    a = run_experiment(tiny5, tiny5, tiny5, ps=(0.5,), tagger_config=TINY, aug_seed=9, runs=2)
    b = run_experiment(tiny5, tiny5, tiny5, ps=(0.5,), tagger_config=TINY, aug_seed=9, runs=2)
    assert a.to_tsv(runtimes=False) == b.to_tsv(runtimes=False)
    assert a.seeds == [(9, 0), (10, 1)]


def test_parallel_matches_serial(tiny5):
    a = run_experiment(tiny5, tiny5, tiny5, ps=(1.0,), tagger_config=TINY, workers=1)
    b = run_experiment(tiny5, tiny5, tiny5, ps=(1.0,), tagger_config=TINY, workers=2)
    assert a.to_tsv(runtimes=False) == b.to_tsv(runtimes=False)


def test_runs_must_be_positive(tiny5):
    with pytest.raises(ValueError):
        run_experiment(tiny5, tiny5, tiny5, runs=0, tagger_config=TINY)
