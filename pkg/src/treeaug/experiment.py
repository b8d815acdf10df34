"""Baseline-vs-augmented tagging experiments.

One tagger is trained per setting (``org`` plus every operation x
probability pair) on the possibly augmented training set; dev and test are
never augmented and are checksummed before and after the run.
"""

from __future__ import annotations

import dataclasses
import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Sequence

from .augment import AugmentConfig, augment_dataset
from .conllu import Sentence, serialize_conllu
from .deptree import LabelConfig
from .tagger import TaggerConfig, evaluate, train

log = logging.getLogger(__name__)

TSV_HEADER = ("setting", "op", "p", "train_sentences", "train_tokens", "test_acc", "runs", "seconds", "status")


@dataclass
class SettingRow:
    setting: str
    op: str | None
    p: float | None
    train_sentences: int = 0
    train_tokens: int = 0
    accuracies: list[float] = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def test_acc(self) -> float | None:
        if not self.accuracies or self.error:
            return None
        return sum(self.accuracies) / len(self.accuracies)


@dataclass
class ExperimentReport:
    rows: list[SettingRow]
    seeds: list[tuple[int, int]]  # (augment seed, tagger seed) per run
    test_checksum_before: str = ""
    test_checksum_after: str = ""
    dev_checksum_before: str = ""
    dev_checksum_after: str = ""

    @property
    def baseline(self) -> SettingRow | None:
        return next((r for r in self.rows if r.setting == "org"), None)

    @property
    def best_augmented(self) -> SettingRow | None:
        done = [r for r in self.rows if r.setting != "org" and r.test_acc is not None]
        return max(done, key=lambda r: r.test_acc, default=None)

    @property
    def improvement_pct(self) -> float | None:
        """(best augmented - org) / org * 100; 0 when there are no augmented settings."""
        org = self.baseline
        if org is None or org.test_acc is None:
            return None
        best = self.best_augmented
        if best is None:
            return 0.0
        return (best.test_acc - org.test_acc) / org.test_acc * 100.0

    @property
    def untouched(self) -> bool:
        return (self.test_checksum_before == self.test_checksum_after
                and self.dev_checksum_before == self.dev_checksum_after)

    def to_tsv(self, runtimes: bool = True) -> str:
        """Fixed-header TSV; ``runtimes=False`` blanks the timing column for diffing."""
        lines = ["\t".join(TSV_HEADER)]
        for r in self.rows:
            acc = "" if r.test_acc is None else f"{r.test_acc:.6f}"
            lines.append("\t".join([
                r.setting, r.op or "-", "-" if r.p is None else f"{r.p:g}", str(r.train_sentences),
                str(r.train_tokens), acc, str(len(r.accuracies)), f"{r.seconds:.1f}" if runtimes else "-",
                "ok" if r.error is None else f"failed: {r.error}",
            ]))
        imp = self.improvement_pct
        lines.append(f"# improvement_pct\t{'' if imp is None else f'{imp:.4f}'}")
        lines.append(f"# seeds\t{' '.join(f'{a}/{t}' for a, t in self.seeds)}")
        lines.append(f"# test_sha256\t{self.test_checksum_after}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        out = [f"{'setting':<12} {'sents':>6} {'tokens':>7} {'acc%':>7}  status"]
        for r in self.rows:
            acc = "-" if r.test_acc is None else f"{100 * r.test_acc:.2f}"
            out.append(f"{r.setting:<12} {r.train_sentences:>6} {r.train_tokens:>7} {acc:>7}  "
                       f"{'ok' if r.error is None else r.error}")
        imp = self.improvement_pct
        best = self.best_augmented
        out.append(f"Imp%: {'-' if imp is None else f'{imp:.2f}'}" + (f" (best: {best.setting})" if best else ""))
        return "\n".join(out) + "\n"


def checksum(sentences: Sequence[Sentence]) -> str:
    return hashlib.sha256(serialize_conllu(sentences, validate=False).encode("utf-8")).hexdigest()


def settings_grid(ops: Sequence[str], ps: Sequence[float]) -> list[tuple[str, str | None, float | None]]:
    grid = [("org", None, None)]
    for op in ops:
        for p in ps:
            grid.append((f"{op}@{p:g}", op, float(p)))
    return grid


def _run_setting(name, op, p, train_set, dev, test, tagger_cfg, labels, aug_base, runs, keep_punct, max_rot):
    row = SettingRow(name, op, p)
    start = time.perf_counter()
    try:
        for r in range(runs):
            data = list(train_set)
            if op is not None:
                cfg = AugmentConfig(operations=(op,), p=p, seed=aug_base + r, labels=labels,
                                    keep_punct=keep_punct, max_rotations_per_sentence=max_rot)
                data = [a.sentence for a in augment_dataset(train_set, cfg)]
            row.train_sentences = len(data)
            row.train_tokens = sum(len(s.tokens) for s in data)
            run_cfg = dataclasses.replace(tagger_cfg, seed=tagger_cfg.seed + r)
            model, _ = train(data, dev, run_cfg)
            row.accuracies.append(evaluate(model, test))
    except Exception as exc:  # one failing setting must not sink the others
        log.exception("setting %s failed", name)
        row.error = f"{type(exc).__name__}: {exc}"
    row.seconds = time.perf_counter() - start
    return row


def run_experiment(
    train_set: Sequence[Sentence],
    dev: Sequence[Sentence],
    test: Sequence[Sentence],
    ops: Sequence[str] = ("crop", "rotate"),
    ps: Sequence[float] = (0.3, 0.7, 1.0),
    tagger_config: TaggerConfig | None = None,
    aug_seed: int = 0,
    runs: int = 1,
    labels: LabelConfig | None = None,
    keep_punct: bool = False,
    max_rot: int | None = None,
    workers: int | None = None,
) -> ExperimentReport:
    tagger_config = tagger_config or TaggerConfig()
    labels = labels or LabelConfig()
    if runs < 1:
        raise ValueError("runs must be positive")
    if workers is None:
        workers = int(os.environ.get("TREEAUG_THREADS", "1") or 1)
    report = ExperimentReport(
        rows=[],
        seeds=[(aug_seed + r, tagger_config.seed + r) for r in range(runs)],
        test_checksum_before=checksum(test),
        dev_checksum_before=checksum(dev),
    )
    grid = settings_grid(ops, ps)
    args = [(name, op, p, train_set, dev, test, tagger_config, labels, aug_seed, runs, keep_punct, max_rot)
            for name, op, p in grid]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            report.rows = list(pool.map(_run_setting, *zip(*args)))
    else:
        for a in args:
            row = _run_setting(*a)
            log.info("%s: acc=%s (%.1fs)", row.setting, row.test_acc, row.seconds)
            report.rows.append(row)
    report.test_checksum_after = checksum(test)
    report.dev_checksum_after = checksum(dev)
    return report
