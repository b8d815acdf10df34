import math
import random

import pytest

from treeaug.stats import CorrelationError, eligibility, fit_line, pearson, read_pairs, size_bucket, treebank_stats

from conftest import make_sentence


def pearson_raw_sums(xs, ys):
    """Textbook single-pass formula, independent of the centred implementation."""
    n = len(xs)
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    syy = sum(y * y for y in ys)
    sxy = sum(x * y for x, y in zip(xs, ys))
    return (n * sxy - sx * sy) / math.sqrt((n * sxx - sx * sx) * (n * syy - sy * sy))


@pytest.mark.parametrize(
    "tokens, verdict, bucket",
    [
        (4_999, "ignored (<5K)", "<20K"),
        (5_000, "eligible", "<20K"),
        (19_999, "eligible", "<20K"),
        (20_000, "eligible", "<80K"),
        (119_999, "eligible", "<120K"),
        (120_000, "ignored (>=120K)", None),
    ],
)
def test_eligibility_boundaries(tokens, verdict, bucket):
    assert eligibility(tokens) == verdict
    assert size_bucket(tokens) == bucket


def test_stats_fig1a(fig1a):
    st = treebank_stats([fig1a])
    assert st.tokens == 5 and st.sentences == 1
    assert st.loi_histogram == {3: 1}
    assert st.verdict == "ignored (<5K)"


def test_stats_counts_invalid_and_ineligible(tiny5):
    bad = make_sentence([("a", "X", 0, "root"), ("b", "X", 0, "root")])
    st = treebank_stats(list(tiny5) + [bad])
    assert st.sentences == 6 and st.invalid_sentences == 1
    assert st.tokens == 18


def test_pearson_perfect():
    assert pearson([1, 2, 3], [2, 4, 6]) == 1.0
    assert pearson([1, 2, 3], [6, 4, 2]) == -1.0


def test_pearson_matches_direct_formula():
    rng = random.Random(11)
    for _ in range(20):
        n = rng.randint(2, 30)
        xs = [rng.uniform(-100, 100) for _ in range(n)]
        ys = [rng.uniform(-5, 5) for _ in range(n)]
        assert pearson(xs, ys) == pytest.approx(pearson_raw_sums(xs, ys), abs=1e-9)


def test_pearson_matches_scipy():
    stats = pytest.importorskip("scipy.stats")
    xs, ys = [3.0, 1.0, 4.0, 1.0, 5.0], [9.0, 2.0, 6.0, 5.0, 3.0]
    assert pearson(xs, ys) == pytest.approx(stats.pearsonr(xs, ys)[0], abs=1e-12)


@pytest.mark.parametrize("xs, ys", [([1, 1, 1], [1, 2, 3]), ([1, 2, 3], [4, 4, 4]), ([1], [2]), ([], [])])
def test_pearson_undefined(xs, ys):
    with pytest.raises(CorrelationError, match="undefined correlation"):
        pearson(xs, ys)


def test_fit_line():
    slope, intercept = fit_line([0, 1, 2], [1, 3, 5])
    assert (slope, intercept) == pytest.approx((2.0, 1.0))


def test_read_pairs(tmp_path):
    p = tmp_path / "pairs.tsv"
    p.write_text("size\tgain\n# comment\n1000\t2.5\n\n2000, -1\n")
    assert read_pairs(p) == [(1000.0, 2.5), (2000.0, -1.0)]
    p.write_text("1\t2\nx\ty\n")
    with pytest.raises(ValueError, match="line 2"):
        read_pairs(p)
