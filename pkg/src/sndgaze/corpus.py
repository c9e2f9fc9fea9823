"""Tokenization of C/Java sources, word normalization and corpus term frequency.

C tokens are used as words unchanged. Java identifiers are split on
underscores and camelCase boundaries and every Java word is lowercased.
"""

from __future__ import annotations

import csv
import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import EmptyCorpusError, LexError

Word = str


class Language(str, enum.Enum):
    C = "C"
    JAVA = "Java"

    @classmethod
    def parse(cls, value: "str | Language") -> "Language":
        if isinstance(value, Language):
            return value
        key = str(value).strip().lower()
        if key == "c":
            return cls.C
        if key == "java":
            return cls.JAVA
        raise ValueError(f"unsupported language: {value!r}")

    @property
    def extensions(self) -> tuple[str, ...]:
        return (".c", ".h") if self is Language.C else (".java",)


class TokenKind(str, enum.Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    LITERAL = "literal"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    kind: TokenKind
    file: str
    line: int
    column: int

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")


C_KEYWORDS = frozenset("""
auto break case char const continue default do double else enum extern float
for goto if inline int long register restrict return short signed sizeof static
struct switch typedef union unsigned void volatile while _Alignas _Alignof
_Atomic _Bool _Complex _Generic _Imaginary _Noreturn _Static_assert
_Thread_local
""".split())

JAVA_KEYWORDS = frozenset("""
abstract assert boolean break byte case catch char class const continue default
do double else enum extends final finally float for goto if implements import
instanceof int interface long native new package private protected public
return short static strictfp super switch synchronized this throw throws
transient try void volatile while
""".split())

JAVA_LITERAL_WORDS = frozenset({"true", "false", "null"})

_C_OPERATORS = sorted(
    """>>= <<= -> ++ -- << >> <= >= == != && || *= /= %= += -= &= ^= |=
    + - * / % < > = ! ~ & | ^ ? : .""".split(),
    key=len, reverse=True,
)
_JAVA_OPERATORS = sorted(
    """>>>= >>> >>= <<= -> :: ++ -- << >> <= >= == != && || *= /= %= += -= &= ^= |=
    + - * / % < > = ! ~ & | ^ ? : .""".split(),
    key=len, reverse=True,
)
_C_PUNCT = sorted(["...", "##", "#", "(", ")", "[", "]", "{", "}", ";", ","], key=len, reverse=True)
_JAVA_PUNCT = sorted(["...", "@", "(", ")", "[", "]", "{", "}", ";", ","], key=len, reverse=True)

_C_STRING_PREFIXES = frozenset({"L", "u", "U", "u8"})
_HEADER_DIRECTIVES = frozenset({"include", "include_next", "import"})


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ch == "$" or ch.isalpha()


def _is_ident_part(ch: str) -> bool:
    return ch == "_" or ch == "$" or ch.isalnum()


class _Scanner:
    def __init__(self, text: str, language: Language, file: str):
        self.text = text
        self.language = language
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        if language is Language.C:
            self.keywords = C_KEYWORDS
            self.operators = _C_OPERATORS
            self.punct = _C_PUNCT
        else:
            self.keywords = JAVA_KEYWORDS
            self.operators = _JAVA_OPERATORS
            self.punct = _JAVA_PUNCT
        # tokens seen on the current logical line, for `#include <...>`
        self.line_tokens: list[str] = []

    def error(self, message: str, line: int, col: int) -> LexError:
        return LexError(message, self.file, line, col)

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
                self.line_tokens = []
            else:
                self.col += 1
            self.pos += 1

    def peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def skip_trivia(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n\f\v":
                self.advance()
            elif ch == "\\" and self.peek(1) in ("\n", "\r"):
                # line splice: the logical line continues
                keep = self.line_tokens
                self.advance()
                if self.peek() == "\r":
                    self.advance()
                if self.peek() == "\n":
                    self.advance()
                self.line_tokens = keep
            elif text.startswith("//", self.pos):
                while self.pos < len(text) and text[self.pos] != "\n":
                    self.advance()
            elif text.startswith("/*", self.pos):
                line, col = self.line, self.col
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    raise self.error("unterminated block comment", line, col)
                keep = self.line_tokens
                newline = "\n" in text[self.pos:end]
                self.advance(end + 2 - self.pos)
                if not newline:
                    self.line_tokens = keep
            else:
                return

    def scan_quoted(self, quote: str, what: str, start: int, line: int, col: int) -> str:
        # self.pos sits on the opening quote
        self.advance()
        while True:
            ch = self.peek()
            if ch == "":
                raise self.error(f"unterminated {what}", line, col)
            if ch == "\n":
                raise self.error(f"unterminated {what}", line, col)
            if ch == "\\":
                if self.peek(1) == "":
                    raise self.error(f"unterminated {what}", line, col)
                self.advance(2)
                continue
            self.advance()
            if ch == quote:
                return self.text[start:self.pos]

    def scan_text_block(self, start: int, line: int, col: int) -> str:
        self.advance(3)
        while True:
            if self.pos >= len(self.text):
                raise self.error("unterminated text block", line, col)
            if self.text.startswith('"""', self.pos):
                self.advance(3)
                return self.text[start:self.pos]
            if self.peek() == "\\" and self.peek(1):
                self.advance(2)
            else:
                self.advance()

    def scan_number(self) -> str:
        # preprocessing-number grammar; accepts 0x1F, 1_000L, 1.5e-3f, .5
        start = self.pos
        self.advance()
        while True:
            ch = self.peek()
            if ch in "eEpP" and self.peek(1) in ("+", "-"):
                self.advance(2)
            elif ch and (ch.isalnum() or ch in "_."):
                if ch == "." and self.text.startswith("...", self.pos):
                    break
                self.advance()
            else:
                break
        return self.text[start:self.pos]

    def tokens(self) -> Iterator[Token]:
        text = self.text
        is_c = self.language is Language.C
        while True:
            self.skip_trivia()
            if self.pos >= len(text):
                return
            line, col, start = self.line, self.col, self.pos
            ch = text[self.pos]

            if is_c and ch == "<" and self.line_tokens[-2:-1] == ["#"] \
                    and self.line_tokens[-1] in _HEADER_DIRECTIVES:
                end = text.find(">", self.pos)
                nl = text.find("\n", self.pos)
                if end >= 0 and (nl < 0 or end < nl):
                    self.advance(end + 1 - self.pos)
                    yield self._emit(text[start:self.pos], TokenKind.LITERAL, line, col)
                    continue

            if _is_ident_start(ch):
                pieces: list[str] = []
                while True:
                    run = self.pos
                    while self.pos < len(text) and _is_ident_part(text[self.pos]):
                        self.advance()
                    pieces.append(text[run:self.pos])
                    # a backslash-newline splice inside a word continues it
                    splice = 3 if text.startswith("\\\r\n", self.pos) else 2 if text.startswith("\\\n", self.pos) else 0
                    if not (is_c and splice and _is_ident_part(self.peek(splice))):
                        break
                    keep = self.line_tokens
                    self.advance(splice)
                    self.line_tokens = keep
                word = "".join(pieces)
                nxt = self.peek()
                if is_c and word in _C_STRING_PREFIXES and nxt in ('"', "'"):
                    what = "string literal" if nxt == '"' else "character literal"
                    lit = self.scan_quoted(nxt, what, start, line, col)
                    yield self._emit(lit, TokenKind.LITERAL, line, col)
                    continue
                if word in self.keywords:
                    kind = TokenKind.KEYWORD
                elif not is_c and word in JAVA_LITERAL_WORDS:
                    kind = TokenKind.LITERAL
                else:
                    kind = TokenKind.IDENTIFIER
                yield self._emit(word, kind, line, col)
                continue

            if ch.isdigit() or (ch == "." and self.peek(1).isdigit()):
                yield self._emit(self.scan_number(), TokenKind.LITERAL, line, col)
                continue

            if ch == '"':
                if not is_c and text.startswith('"""', self.pos):
                    lit = self.scan_text_block(start, line, col)
                else:
                    lit = self.scan_quoted('"', "string literal", start, line, col)
                yield self._emit(lit, TokenKind.LITERAL, line, col)
                continue

            if ch == "'":
                lit = self.scan_quoted("'", "character literal", start, line, col)
                yield self._emit(lit, TokenKind.LITERAL, line, col)
                continue

            for p in self.punct:
                if text.startswith(p, self.pos):
                    self.advance(len(p))
                    yield self._emit(p, TokenKind.PUNCTUATION, line, col)
                    break
            else:
                for op in self.operators:
                    if text.startswith(op, self.pos):
                        self.advance(len(op))
                        yield self._emit(op, TokenKind.OPERATOR, line, col)
                        break
                else:
                    raise self.error(f"unexpected character {ch!r}", line, col)

    def _emit(self, text: str, kind: TokenKind, line: int, col: int) -> Token:
        self.line_tokens.append(text)
        return Token(text, kind, self.file, line, col)


def tokenize(source_text: str, language: "Language | str", file: str = "<string>") -> list[Token]:
    """Lex `source_text` into tokens in source order.

    Comments and whitespace produce no tokens. Raises `LexError` with the
    position of the offending construct for unterminated strings, character
    literals or block comments.
    """
    return list(_Scanner(source_text, Language.parse(language), file).tokens())


def iter_source_files(src: "str | Path", language: "Language | str") -> list[Path]:
    lang = Language.parse(language)
    root = Path(src)
    if not root.is_dir():
        raise FileNotFoundError(f"source directory not found: {root}")
    files = [p for p in root.rglob("*") if p.is_file() and p.suffix in lang.extensions]
    return sorted(files, key=lambda p: p.relative_to(root).as_posix())


def tokenize_directory(src: "str | Path", language: "Language | str") -> list[Token]:
    """Tokenize every source file under `src`, merged in path order."""
    lang = Language.parse(language)
    root = Path(src)
    tokens: list[Token] = []
    for path in iter_source_files(root, lang):
        text = path.read_text(encoding="utf-8")
        tokens.extend(tokenize(text, lang, file=path.relative_to(root).as_posix()))
    return tokens


def _char_class(ch: str) -> str:
    if ch.isdigit():
        return "digit"
    if ch.isupper():
        return "upper"
    if ch.islower():
        return "lower"
    return "other"


def split_identifier(identifier: str) -> list[str]:
    """Split a Java identifier on underscores and camelCase boundaries.

    Acronym runs keep all but their last capital (``XMLParser`` gives
    ``["xml", "parser"]``) and digits stay with the preceding part
    (``utf8Encoder`` gives ``["utf8", "encoder"]``). Parts are lowercased.

    >>> split_identifier("rdbSaveLzfBlob")
    ['rdb', 'save', 'lzf', 'blob']
    """
    parts: list[str] = []
    for chunk in identifier.split("_"):
        if not chunk:
            continue
        start = 0
        classes = [_char_class(c) for c in chunk]
        for i in range(1, len(chunk)):
            prev, cur = classes[i - 1], classes[i]
            if cur != "upper":
                continue
            nxt = classes[i + 1] if i + 1 < len(chunk) else None
            if prev in ("lower", "digit") or (prev == "upper" and nxt == "lower"):
                parts.append(chunk[start:i])
                start = i
        parts.append(chunk[start:])
    return [p.lower() for p in parts if p]


@dataclass(frozen=True)
class FilterConfig:
    """Which token kinds enter the vocabulary."""

    identifiers: bool = True
    keywords: bool = True
    literals: bool = True
    operators: bool = False
    punctuation: bool = False

    def includes(self, kind: TokenKind) -> bool:
        return {
            TokenKind.IDENTIFIER: self.identifiers,
            TokenKind.KEYWORD: self.keywords,
            TokenKind.LITERAL: self.literals,
            TokenKind.OPERATOR: self.operators,
            TokenKind.PUNCTUATION: self.punctuation,
        }[kind]


def normalize_token(token: Token, language: "Language | str") -> list[Word]:
    """Map one token to the words it contributes."""
    lang = Language.parse(language)
    if lang is Language.C:
        return [token.text]
    if token.kind is TokenKind.IDENTIFIER:
        return split_identifier(token.text)
    # underscores in Java literals are digit separators or string content
    word = token.text.lower().replace("_", "")
    return [word] if word else []


@dataclass(frozen=True)
class Vocabulary:
    language: Language
    counts: dict[Word, int] = field(default_factory=dict)
    total_tokens: int = 0

    def __post_init__(self):
        if any(c < 1 for c in self.counts.values()):
            raise ValueError("every vocabulary count must be >= 1")
        if sum(self.counts.values()) != self.total_tokens:
            raise ValueError("total_tokens must equal the sum of counts")

    @classmethod
    def from_counts(cls, counts: "dict[Word, int] | Counter", language: "Language | str") -> "Vocabulary":
        ordered = {w: int(counts[w]) for w in sorted(counts)}
        return cls(Language.parse(language), ordered, sum(ordered.values()))

    @property
    def words(self) -> list[Word]:
        return list(self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, word: object) -> bool:
        return word in self.counts


def build_vocabulary(
    tokens: Iterable[Token],
    language: "Language | str",
    filter: FilterConfig | None = None,
) -> Vocabulary:
    lang = Language.parse(language)
    filt = filter or FilterConfig()
    counter: Counter[str] = Counter()
    seen = False
    for tok in tokens:
        seen = True
        if filt.includes(tok.kind):
            counter.update(normalize_token(tok, lang))
    if not seen:
        raise EmptyCorpusError("token stream is empty")
    if not counter:
        raise EmptyCorpusError("no tokens survive the filter")
    return Vocabulary.from_counts(counter, lang)


def term_frequency(vocab: Vocabulary) -> dict[Word, float]:
    """Corpus-level TF: each word's count over the total count."""
    if not vocab.counts:
        raise EmptyCorpusError("vocabulary is empty")
    total = vocab.total_tokens
    return {w: c / total for w, c in vocab.counts.items()}


VOCAB_HEADER = ("word", "count", "tf")


def write_vocabulary_csv(vocab: Vocabulary, path: "str | Path") -> None:
    tf = term_frequency(vocab)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(VOCAB_HEADER)
        for w, c in vocab.counts.items():
            writer.writerow([w, c, repr(tf[w])])


def read_vocabulary_csv(path: "str | Path", language: "Language | str") -> Vocabulary:
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(VOCAB_HEADER[:2]) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            counts[row["word"]] = int(row["count"])
    if not counts:
        raise EmptyCorpusError(f"{path}: vocabulary file has no rows")
    return Vocabulary.from_counts(counts, language)


def read_tf_csv(path: "str | Path") -> dict[Word, float]:
    """Read the ``tf`` column of a vocabulary CSV."""
    out: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            tf = float(row["tf"])
            if not (math.isfinite(tf) and tf > 0):
                raise ValueError(f"{path}: invalid tf for {row['word']!r}")
            out[row["word"]] = tf
    return out


def vocabulary_from_sources(
    src: "str | Path",
    language: "Language | str",
    filter: FilterConfig | None = None,
) -> Vocabulary:
    return build_vocabulary(tokenize_directory(src, language), language, filter)


__all__ = [
    "Language", "TokenKind", "Token", "Word", "FilterConfig", "Vocabulary",
    "tokenize", "tokenize_directory", "iter_source_files", "split_identifier",
    "normalize_token", "build_vocabulary", "term_frequency",
    "write_vocabulary_csv", "read_vocabulary_csv", "read_tf_csv",
    "vocabulary_from_sources",
]
