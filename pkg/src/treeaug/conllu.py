"""CoNLL-U reading, validation and writing.

Only the ID, HEAD, DEPREL and UPOS columns are interpreted; every other
column is carried through as an opaque string.  Multiword-token ranges
("1-2") and empty nodes ("1.1") are kept verbatim as *nonstandard* lines,
anchored to the number of regular token lines that precede them.
"""

from __future__ import annotations

import dataclasses
import functools
import io
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, TextIO

__all__ = [
    "ConlluError",
    "ConlluParseError",
    "ConlluValidationError",
    "Token",
    "Sentence",
    "Violation",
    "parse_conllu",
    "read_conllu",
    "serialize_conllu",
    "write_conllu",
    "validate_sentence",
    "sentence_text",
]

NUM_COLUMNS = 10


class ConlluError(ValueError):
    pass


class ConlluParseError(ConlluError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConlluValidationError(ConlluError):
    def __init__(self, violations: "Iterable[Violation]", where: str = ""):
        self.violations = tuple(violations)
        kinds = ", ".join(v.message for v in self.violations)
        super().__init__(f"{where}{kinds}" if where else kinds)


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    head: int = 0
    deprel: str = "_"
    deps: str = "_"
    misc: str = "_"

    def to_line(self) -> str:
        return "\t".join(
            [
                str(self.id), self.form, self.lemma, self.upos, self.xpos,
                self.feats, str(self.head), self.deprel, self.deps, self.misc,
            ]
        )


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()
    # (number of token lines preceding the line, raw line)
    nonstandard_lines: tuple[tuple[int, str], ...] = ()
    line: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "comments", tuple(self.comments))
        object.__setattr__(self, "nonstandard_lines", tuple(self.nonstandard_lines))

    def __len__(self) -> int:
        return len(self.tokens)

    @functools.cached_property
    def violations(self) -> tuple["Violation", ...]:
        return tuple(validate_sentence(self))

    @property
    def is_valid(self) -> bool:
        return not self.violations

    @property
    def augmentation_ineligible(self) -> bool:
        """True for sentences we refuse to restructure (invalid or with MWT/empty nodes)."""
        return bool(self.nonstandard_lines) or not self.is_valid

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def tags(self) -> list[str]:
        return [t.upos for t in self.tokens]

    def token(self, token_id: int) -> Token:
        return self.tokens[token_id - 1]

    def comment_value(self, key: str) -> str | None:
        prefix = f"# {key} ="
        for c in self.comments:
            if c.startswith(prefix):
                return c[len(prefix):].strip()
        return None


class Violation(NamedTuple):
    kind: str  # contiguous-id | head-range | single-root | cycle | self-loop
    message: str
    token_id: int | None = None


def sentence_text(tokens: Iterable[Token]) -> str:
    return " ".join(t.form for t in tokens)


def validate_sentence(s: Sentence) -> list[Violation]:
    """Return every structural violation in ``s``; an empty list means valid."""
    out: list[Violation] = []
    ids = [t.id for t in s.tokens]
    n = len(ids)
    if ids != list(range(1, n + 1)):
        out.append(Violation("contiguous-id", f"token ids not contiguous: {ids}"))
    idset = set(ids)
    heads = {}
    for t in s.tokens:
        if t.head == t.id:
            out.append(Violation("self-loop", f"token {t.id} is its own head", t.id))
        elif t.head != 0 and t.head not in idset:
            out.append(Violation("head-range", f"head out of range: token {t.id} -> {t.head}", t.id))
        else:
            heads[t.id] = t.head
    roots = [t.id for t in s.tokens if t.head == 0]
    if n and not roots:
        out.append(Violation("single-root", "no root"))
    elif len(roots) > 1:
        out.append(Violation("single-root", f"multiple roots: {roots}"))
    # cycle check: walk head chains; a chain that revisits a node never reaches 0
    reaches_root: dict[int, bool] = {}
    for start in heads:
        path = []
        on_path = set()
        node = start
        ok = False
        while True:
            if node == 0:
                ok = True
                break
            if node in reaches_root:
                ok = reaches_root[node]
                break
            if node in on_path or node not in heads:
                break
            on_path.add(node)
            path.append(node)
            node = heads[node]
        for p in path:
            reaches_root[p] = ok
    cyclic = sorted(i for i, ok in reaches_root.items() if not ok)
    if cyclic:
        out.append(Violation("cycle", f"cycle: tokens {cyclic} never reach the root"))
    return out


def _parse_int(text: str, what: str, lineno: int) -> int:
    if not text.isascii() or not text.isdigit():
        raise ConlluParseError(f"non-integer {what}: {text!r}", lineno)
    return int(text)


def _sentences(lines: Iterable[tuple[int, str]]) -> Iterable[Sentence]:
    comments: list[str] = []
    tokens: list[Token] = []
    nonstandard: list[tuple[int, str]] = []
    start = None

    def flush():
        return Sentence(tokens, comments, nonstandard, line=start)

    for lineno, raw in lines:
        if raw.strip() == "":
            if comments or tokens or nonstandard:
                if not tokens:
                    raise ConlluParseError("sentence has no token lines", lineno)
                yield flush()
            comments, tokens, nonstandard, start = [], [], [], None
            continue
        if start is None:
            start = lineno
        if raw.startswith("#"):
            if tokens or nonstandard:
                raise ConlluParseError("comment line after token lines", lineno)
            comments.append(raw)
            continue
        cols = raw.split("\t")
        if len(cols) != NUM_COLUMNS:
            raise ConlluParseError(f"expected {NUM_COLUMNS} tab-separated columns, got {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid or "." in tid:
            sep = "-" if "-" in tid else "."
            parts = tid.split(sep)
            if len(parts) != 2:
                raise ConlluParseError(f"malformed id {tid!r}", lineno)
            for part in parts:
                _parse_int(part, "id", lineno)
            nonstandard.append((len(tokens), raw))
            continue
        tokens.append(
            Token(
                id=_parse_int(tid, "id", lineno),
                form=cols[1],
                lemma=cols[2],
                upos=cols[3],
                xpos=cols[4],
                feats=cols[5],
                head=_parse_int(cols[6], "head", lineno),
                deprel=cols[7],
                deps=cols[8],
                misc=cols[9],
            )
        )
    if comments or tokens or nonstandard:
        if not tokens:
            raise ConlluParseError("sentence has no token lines", start)
        yield flush()


def parse_conllu(text: str | bytes | TextIO) -> list[Sentence]:
    """Parse CoNLL-U text into sentences, in file order.

    Accepts a string, UTF-8 bytes or a text stream; LF and CRLF line ends are
    both accepted.  Structural problems (bad heads, cycles, several roots) do
    not raise: they are reported by ``Sentence.violations``.  Anything that
    cannot be read as CoNLL-U raises :class:`ConlluParseError`.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConlluParseError(f"input is not valid UTF-8 ({exc.reason} at byte {exc.start})") from None
    elif not isinstance(text, str):
        text = text.read()
    if text.startswith("\ufeff"):
        text = text[1:]
    text = text.replace("\r\n", "\n")
    lines = enumerate(text.split("\n"), start=1)
    return list(_sentences(lines))


def read_conllu(path) -> list[Sentence]:
    with open(path, "rb") as f:
        return parse_conllu(f.read())


def _sentence_lines(s: Sentence) -> list[str]:
    lines = list(s.comments)
    extra = list(s.nonstandard_lines)
    k = 0
    for i, tok in enumerate(s.tokens):
        while k < len(extra) and extra[k][0] <= i:
            lines.append(extra[k][1])
            k += 1
        lines.append(tok.to_line())
    lines.extend(raw for _, raw in extra[k:])
    return lines


def serialize_conllu(sentences: Iterable[Sentence], validate: bool = True) -> str:
    """Write sentences as CoNLL-U (LF line ends, blank line after each sentence).

    With ``validate`` (the default) a structurally invalid sentence raises
    :class:`ConlluValidationError` naming the violated invariant.
    """
    buf = io.StringIO()
    for idx, s in enumerate(sentences):
        if validate and s.violations:
            raise ConlluValidationError(s.violations, where=f"sentence {idx + 1}: ")
        for line in _sentence_lines(s):
            buf.write(line)
            buf.write("\n")
        buf.write("\n")
    return buf.getvalue()


def write_conllu(path, sentences: Iterable[Sentence], validate: bool = True) -> None:
    text = serialize_conllu(sentences, validate=validate)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def replace_tokens(s: Sentence, tokens: Iterable[Token], comments: Iterable[str] | None = None) -> Sentence:
    return dataclasses.replace(
        s,
        tokens=tuple(tokens),
        comments=s.comments if comments is None else tuple(comments),
        nonstandard_lines=(),
    )
