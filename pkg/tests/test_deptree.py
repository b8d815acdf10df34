import pytest

from treeaug.conllu import read_conllu
from treeaug.deptree import (
    LabelConfig,
    TreeError,
    build_tree,
    extract_chunks,
    load_label_config,
    loi_dependents,
    root_phrase,
    subtree_tokens,
)
from treeaug.synthetic import bundled_path

from conftest import DATA, make_sentence


def test_build_tree_fig1a(fig1a):
    t = build_tree(fig1a)
    assert t.root_id == 5
    assert t.children[5] == (1, 2, 4)
    assert t.children[4] == (3,)
    assert t.children[1] == ()


def test_single_token_tree():
    t = build_tree(make_sentence([("geldi", "VERB", 0, "root")]))
    assert t.root_id == 1
    assert t.children == {1: ()}


def test_cyclic_input_rejected():
    with pytest.raises(TreeError, match="cycle"):
        build_tree(make_sentence([("a", "X", 2, "x"), ("b", "X", 1, "x"), ("c", "X", 0, "root")]))


@pytest.mark.parametrize("tid, expected", [(4, [3, 4]), (1, [1]), (2, [2]), (3, [3]), (5, [1, 2, 3, 4, 5])])
def test_subtree_tokens(fig1a, tid, expected):
    assert subtree_tokens(build_tree(fig1a), tid) == expected


def test_subtree_unknown_id(fig1a):
    with pytest.raises(KeyError):
        subtree_tokens(build_tree(fig1a), 9)


def test_loi_dependents_fig1a(fig1a):
    assert loi_dependents(build_tree(fig1a), LabelConfig()) == [(1, "nsubj"), (2, "iobj"), (4, "obj")]


def test_dobj_alias():
    rows = [("Babası", "NOUN", 3, "nsubj"), ("mektup", "NOUN", 3, "dobj"), ("yazdı", "VERB", 0, "root")]
    t = build_tree(make_sentence(rows))
    assert [d for d, _ in loi_dependents(t, LabelConfig())] == [1, 2]


def test_subtypes():
    rows = [("kitap", "NOUN", 2, "nsubj:pass"), ("okundu", "VERB", 0, "root"), ("dün", "ADV", 2, "obl:tmod")]
    t = build_tree(make_sentence(rows))
    # oracle: base label is the text before the first ':'
    expected = [(i, r) for i, r in [(1, "nsubj:pass"), (3, "obl:tmod")] if r.split(":")[0] in {"nsubj", "obl"}]
    assert loi_dependents(t, LabelConfig()) == expected
    assert loi_dependents(t, LabelConfig(match_subtypes=False)) == []


def test_no_loi_children():
    rows = [("hemen", "ADV", 2, "advmod"), ("geldi", "VERB", 0, "root"), (".", "PUNCT", 2, "punct")]
    assert loi_dependents(build_tree(make_sentence(rows)), LabelConfig()) == []


def test_only_first_level():
    # nsubj below an obj does not count
    rows = [("a", "NOUN", 2, "nsubj"), ("b", "NOUN", 3, "obj"), ("c", "VERB", 0, "root")]
    assert loi_dependents(build_tree(make_sentence(rows)), LabelConfig()) == [(2, "obj")]


def test_root_phrase_fig1a(fig1a):
    assert root_phrase(build_tree(fig1a), LabelConfig()) == [5]


def test_root_phrase_closure():
    # root <- cop child <- fixed grandchild
    rows = [("güzel", "ADJ", 0, "root"), ("de", "AUX", 1, "cop"), ("ki", "PART", 2, "fixed")]
    assert root_phrase(build_tree(make_sentence(rows)), LabelConfig()) == [1, 2, 3]


def test_root_phrase_single_token():
    assert root_phrase(build_tree(make_sentence([("geldi", "VERB", 0, "root")])), LabelConfig()) == [1]


def test_root_phrase_stops_at_other_labels():
    rows = [("New", "PROPN", 3, "nsubj"), ("York", "PROPN", 1, "flat"), ("güzel", "ADJ", 0, "root"),
            ("idi", "AUX", 3, "cop")]
    assert root_phrase(build_tree(make_sentence(rows)), LabelConfig()) == [3, 4]


def test_extract_chunks_fig1a(fig1a):
    d = extract_chunks(build_tree(fig1a), LabelConfig())
    assert d.root_chunk == (5,)
    assert d.flexible_chunks == (("nsubj", (1,)), ("iobj", (2,)), ("obj", (3, 4)))
    assert d.n == 3


def test_extract_chunks_no_loi():
    rows = [("hemen", "ADV", 2, "advmod"), ("geldi", "VERB", 0, "root")]
    d = extract_chunks(build_tree(make_sentence(rows)), LabelConfig())
    assert d.root_chunk == (1, 2) and d.n == 0


def test_extract_chunks_punct_stays_with_root():
    rows = [("evde", "NOUN", 2, "obl"), ("uyudu", "VERB", 0, "root"), (".", "PUNCT", 2, "punct")]
    d = extract_chunks(build_tree(make_sentence(rows)), LabelConfig())
    # manual decomposition
    assert d.root_chunk == (2, 3)
    assert d.flexible_chunks == (("obl", (1,)),)
    assert d.n == 1


def test_non_projective_chunks_are_id_sets():
    # obj subtree {1, 3} interleaves with the nsubj chunk {2}
    rows = [("x", "DET", 3, "det"), ("y", "NOUN", 4, "nsubj"), ("z", "NOUN", 4, "obj"), ("v", "VERB", 0, "root")]
    d = extract_chunks(build_tree(make_sentence(rows)), LabelConfig())
    assert d.flexible_chunks == (("nsubj", (2,)), ("obj", (1, 3)))


def _corpus():
    sents = []
    for path in (bundled_path("train"), bundled_path("dev"), bundled_path("test"), DATA / "mixed.conllu",
                 DATA / "tiny5.conllu", DATA / "fig1a.conllu"):
        sents.extend(read_conllu(path))
    return [s for s in sents if not s.augmentation_ineligible]


def test_partition_and_structural_properties_on_corpus():
    cfg = LabelConfig()
    sents = _corpus()
    assert len(sents) > 200
    for s in sents:
        t = build_tree(s)
        d = extract_chunks(t, cfg)
        chunks = [d.root_chunk] + [ids for _, ids in d.flexible_chunks]
        flat = [i for c in chunks for i in c]
        assert sorted(flat) == list(range(1, len(s.tokens) + 1))
        assert len(flat) == len(set(flat))
        for c in chunks:
            assert list(c) == sorted(c)
        assert subtree_tokens(t, t.root_id) == list(range(1, len(s.tokens) + 1))
        deps = loi_dependents(t, cfg)
        assert {i for i, _ in deps} <= set(t.children[t.root_id])
        assert d.n == len(deps)
        for (dep, _), (_, ids) in zip(deps, d.flexible_chunks):
            assert list(ids) == subtree_tokens(t, dep)


def test_children_inverse_of_heads():
    for s in _corpus():
        t = build_tree(s)
        pairs = {(c, h) for h, cs in t.children.items() for c in cs}
        assert pairs == {(tok.id, tok.head) for tok in s.tokens if tok.head}


def test_label_config_validation():
    with pytest.raises(ValueError):
        LabelConfig(loi=[])
    with pytest.raises(ValueError, match=":"):
        LabelConfig(loi=["nsubj:pass"])


def test_label_config_file(tmp_path):
    p = tmp_path / "labels.cfg"
    p.write_text("loi = nsubj, obj  # core only\nroot_phrase = flat\nmatch_subtypes = no\n")
    cfg = load_label_config(p)
    assert cfg.loi == {"nsubj", "obj"}
    assert cfg.root_phrase == {"flat"}
    assert cfg.match_subtypes is False
    assert load_label_config(p, loi=["obl"]).loi == {"obl"}
    p.write_text("bogus = 1\n")
    with pytest.raises(ValueError, match="unknown"):
        load_label_config(p)
