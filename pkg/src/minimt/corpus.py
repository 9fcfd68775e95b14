"""Parallel corpus loading, cleaning, and splitting.

Cleaning applies four rule families, in this order:

1. noise      -- configurable normalization/drop rules (punctuation collapse,
                 script-mismatch drops, user regexes)
2. exact_dup  -- keep the first occurrence of each (source, target) pair
3. conflict   -- a source (or target) repeated in more than ``max_reps``
                 surviving pairs has the conflicting members of its group
                 removed when their varying-side lengths fall within
                 ``length_window`` tokens of another group member
4. over_length -- drop pairs where either side exceeds ``max_len`` tokens

Running noise rules first keeps the whole pipeline idempotent: every
normalization here is a fixed point of itself, so a second pass finds no
new duplicates or conflicts.

String comparisons for deduplication and conflict grouping use Unicode NFC
normalization; Indic scripts admit multiple byte encodings of identical
glyph sequences.
"""

from __future__ import annotations

import json
import random
import re
import unicodedata
from dataclasses import dataclass, field

from .errors import AlignmentError, ConfigError

_WORD_OR_PUNCT = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_SPACES = re.compile(r"\s+")

# Letter ranges per supported language code, used by script-mismatch rules.
SCRIPT_RANGES: dict[str, tuple[tuple[int, int], ...]] = {
    "ta": ((0x0B80, 0x0BFF),),
    "ml": ((0x0D00, 0x0D7F),),
    "te": ((0x0C00, 0x0C7F),),
    "bn": ((0x0980, 0x09FF),),
    "hi": ((0x0900, 0x097F),),
    "ur": ((0x0600, 0x06FF), (0x0750, 0x077F), (0xFB50, 0xFDFF)),
    "en": ((0x0041, 0x005A), (0x0061, 0x007A), (0x00C0, 0x024F)),
}


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair; lengths are whitespace token counts."""

    source: str
    target: str
    origin: str = ""
    source_len: int = field(init=False)
    target_len: int = field(init=False)

    def __post_init__(self):
        if not self.source.strip() or not self.target.strip():
            raise ValueError("sentence pair sides must be non-empty after trimming")
        object.__setattr__(self, "source_len", len(self.source.split()))
        object.__setattr__(self, "target_len", len(self.target.split()))

    def key(self) -> tuple[str, str]:
        return (_nfc(self.source), _nfc(self.target))


@dataclass
class ParallelCorpus:
    pairs: list[SentencePair]
    source_lang: str = "en"
    target_lang: str = "xx"

    def __len__(self) -> int:
        return len(self.pairs)

    def with_pairs(self, pairs: list[SentencePair]) -> "ParallelCorpus":
        return ParallelCorpus(pairs, self.source_lang, self.target_lang)


@dataclass
class CleanReport:
    """Per-rule removal counts; input_size = output_size + sum of removals."""

    input_size: int = 0
    output_size: int = 0
    exact_dup: int = 0
    conflict: int = 0
    over_length: int = 0
    noise: int = 0

    @property
    def removed(self) -> int:
        return self.exact_dup + self.conflict + self.over_length + self.noise

    def check(self) -> None:
        if self.input_size != self.output_size + self.removed:
            raise AssertionError(
                f"clean report does not balance: {self.input_size} != "
                f"{self.output_size} + {self.removed}"
            )

    def merged_with(self, other: "CleanReport") -> "CleanReport":
        """Chain two reports: self's output feeds other's input."""
        if self.output_size != other.input_size:
            raise ValueError("reports are not consecutive")
        return CleanReport(
            input_size=self.input_size,
            output_size=other.output_size,
            exact_dup=self.exact_dup + other.exact_dup,
            conflict=self.conflict + other.conflict,
            over_length=self.over_length + other.over_length,
            noise=self.noise + other.noise,
        )

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "output_size": self.output_size,
            "removed": {
                "exact_dup": self.exact_dup,
                "conflict": self.conflict,
                "over_length": self.over_length,
                "noise": self.noise,
            },
        }


# ---------------------------------------------------------------------------
# Loading and saving


def load_parallel(source_path, target_path, source_lang="en", target_lang="xx",
                  origin="") -> ParallelCorpus:
    """Zip two line-aligned text files into a corpus.

    Raises AlignmentError when the files disagree on line count.
    """
    with open(source_path, encoding="utf-8") as f:
        src_lines = f.read().splitlines()
    with open(target_path, encoding="utf-8") as f:
        tgt_lines = f.read().splitlines()
    if len(src_lines) != len(tgt_lines):
        raise AlignmentError(
            f"line count mismatch: {source_path} has {len(src_lines)} lines, "
            f"{target_path} has {len(tgt_lines)}"
        )
    pairs = [
        SentencePair(s.strip(), t.strip(), origin=origin)
        for s, t in zip(src_lines, tgt_lines)
    ]
    return ParallelCorpus(pairs, source_lang, target_lang)


def load_tsv(path, source_lang="en", target_lang="xx", origin="") -> ParallelCorpus:
    """Load a corpus from one TSV file with source<TAB>target per line."""
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f.read().splitlines(), start=1):
            cols = line.split("\t")
            if len(cols) != 2:
                raise AlignmentError(
                    f"{path}:{lineno}: expected 2 tab-separated columns, got {len(cols)}"
                )
            pairs.append(SentencePair(cols[0].strip(), cols[1].strip(), origin=origin))
    return ParallelCorpus(pairs, source_lang, target_lang)


def save_parallel(corpus: ParallelCorpus, source_path, target_path) -> None:
    with open(source_path, "w", encoding="utf-8") as f:
        f.write("".join(p.source + "\n" for p in corpus.pairs))
    with open(target_path, "w", encoding="utf-8") as f:
        f.write("".join(p.target + "\n" for p in corpus.pairs))


# ---------------------------------------------------------------------------
# Cleaning rules


def dedup_exact(corpus: ParallelCorpus) -> tuple[ParallelCorpus, CleanReport]:
    """Keep the first occurrence of each (source, target) pair."""
    seen: set[tuple[str, str]] = set()
    survivors = []
    for pair in corpus.pairs:
        key = pair.key()
        if key in seen:
            continue
        seen.add(key)
        survivors.append(pair)
    report = CleanReport(
        input_size=len(corpus.pairs),
        output_size=len(survivors),
        exact_dup=len(corpus.pairs) - len(survivors),
    )
    return corpus.with_pairs(survivors), report


def drop_conflicting(corpus: ParallelCorpus, max_reps: int = 2,
                     length_window: int = 5) -> tuple[ParallelCorpus, CleanReport]:
    """Remove length-ambiguous members of over-repeated source/target groups.

    A source string occurring in more than ``max_reps`` pairs forms a group;
    a member is removed when its *target* length is within ``length_window``
    tokens of another member's target length (the varying side is compared,
    since the fixed side gives no signal about which translation is right).
    Target groups are handled symmetrically over source lengths.

    Exact duplicates are removed first if still present, counted separately.
    """
    base, dup_report = dedup_exact(corpus)
    drop: set[int] = set()

    def mark(group_key, varying_len):
        groups: dict[str, list[int]] = {}
        for i, pair in enumerate(base.pairs):
            groups.setdefault(group_key(pair), []).append(i)
        for members in groups.values():
            if len(members) <= max_reps:
                continue
            lens = [varying_len(base.pairs[i]) for i in members]
            for a, idx in enumerate(members):
                if any(b != a and abs(lens[a] - lens[b]) <= length_window
                       for b in range(len(members))):
                    drop.add(idx)

    mark(lambda p: _nfc(p.source), lambda p: p.target_len)
    mark(lambda p: _nfc(p.target), lambda p: p.source_len)

    survivors = [p for i, p in enumerate(base.pairs) if i not in drop]
    report = CleanReport(
        input_size=len(corpus.pairs),
        output_size=len(survivors),
        exact_dup=dup_report.exact_dup,
        conflict=len(drop),
    )
    return corpus.with_pairs(survivors), report


def filter_length(corpus: ParallelCorpus, max_len: int = 50) -> tuple[ParallelCorpus, CleanReport]:
    """Drop pairs where either side has more than ``max_len`` tokens."""
    survivors = [
        p for p in corpus.pairs
        if p.source_len <= max_len and p.target_len <= max_len
    ]
    report = CleanReport(
        input_size=len(corpus.pairs),
        output_size=len(survivors),
        over_length=len(corpus.pairs) - len(survivors),
    )
    return corpus.with_pairs(survivors), report


# ---------------------------------------------------------------------------
# Noise rules


@dataclass(frozen=True)
class NoiseRule:
    kind: str
    chars: str = "!?.,;:"
    side: str = "both"
    pattern: str = ""
    min_native_fraction: float = 0.5

    _KINDS = ("collapse_punct", "strip_chars", "script_mismatch", "drop_regex")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ConfigError(f"unknown noise rule kind {self.kind!r}")
        if self.side not in ("source", "target", "both"):
            raise ConfigError(f"bad rule side {self.side!r}")
        if self.kind == "drop_regex":
            if not self.pattern:
                raise ConfigError("drop_regex rule requires a pattern")
            try:
                re.compile(self.pattern)
            except re.error as exc:
                raise ConfigError(f"bad drop_regex pattern {self.pattern!r}: {exc}") from exc


@dataclass(frozen=True)
class NoiseRuleSet:
    rules: tuple[NoiseRule, ...] = ()

    @classmethod
    def default(cls) -> "NoiseRuleSet":
        return cls((
            NoiseRule(kind="collapse_punct"),
            NoiseRule(kind="script_mismatch"),
        ))

    @classmethod
    def from_json(cls, text: str) -> "NoiseRuleSet":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"rule file is not valid JSON: {exc}") from exc
        if not isinstance(raw, list):
            raise ConfigError("rule file must hold a JSON list of rules")
        rules = []
        for entry in raw:
            if not isinstance(entry, dict) or "kind" not in entry:
                raise ConfigError(f"rule entry must be an object with a 'kind': {entry!r}")
            allowed = {"kind", "chars", "side", "pattern", "min_native_fraction"}
            unknown = set(entry) - allowed
            if unknown:
                raise ConfigError(f"unknown rule fields: {sorted(unknown)}")
            rules.append(NoiseRule(**entry))
        return cls(tuple(rules))

    @classmethod
    def from_file(cls, path) -> "NoiseRuleSet":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())


def _collapse_punct(text: str, chars: str) -> str:
    out = []
    prev = None
    for ch in text:
        if ch in chars and ch == prev:
            continue
        out.append(ch)
        prev = ch
    return _SPACES.sub(" ", "".join(out)).strip()


def _strip_chars(text: str, chars: str) -> str:
    out = "".join(ch for ch in text if ch not in chars)
    return _SPACES.sub(" ", out).strip()


def _native_letter_fraction(text: str, lang: str) -> float | None:
    """Fraction of alphabetic characters inside the language's script ranges.

    Returns None when the language is unknown or the text has no letters.
    """
    ranges = SCRIPT_RANGES.get(lang)
    if ranges is None:
        return None
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return None
    native = sum(
        1 for ch in letters if any(lo <= ord(ch) <= hi for lo, hi in ranges)
    )
    return native / len(letters)


def strip_noise(corpus: ParallelCorpus, rules: NoiseRuleSet) -> tuple[ParallelCorpus, CleanReport]:
    """Apply noise rules in order; transforms normalize, drop rules remove.

    A pair whose side becomes empty after normalization is dropped and
    counted as noise.
    """
    survivors = []
    dropped = 0
    compiled = {
        r.pattern: re.compile(r.pattern)
        for r in rules.rules if r.kind == "drop_regex"
    }
    for pair in corpus.pairs:
        src, tgt = pair.source, pair.target
        drop = False
        for rule in rules.rules:
            if rule.kind == "collapse_punct":
                if rule.side in ("source", "both"):
                    src = _collapse_punct(src, rule.chars)
                if rule.side in ("target", "both"):
                    tgt = _collapse_punct(tgt, rule.chars)
            elif rule.kind == "strip_chars":
                if rule.side in ("source", "both"):
                    src = _strip_chars(src, rule.chars)
                if rule.side in ("target", "both"):
                    tgt = _strip_chars(tgt, rule.chars)
            elif rule.kind == "script_mismatch":
                frac = _native_letter_fraction(tgt, corpus.target_lang)
                if frac is not None and frac < rule.min_native_fraction:
                    drop = True
                    break
            elif rule.kind == "drop_regex":
                rx = compiled[rule.pattern]
                if rule.side in ("source", "both") and rx.search(src):
                    drop = True
                    break
                if rule.side in ("target", "both") and rx.search(tgt):
                    drop = True
                    break
        if drop or not src or not tgt:
            dropped += 1
            continue
        if src != pair.source or tgt != pair.target:
            pair = SentencePair(src, tgt, origin=pair.origin)
        survivors.append(pair)
    report = CleanReport(
        input_size=len(corpus.pairs),
        output_size=len(survivors),
        noise=dropped,
    )
    return corpus.with_pairs(survivors), report


# ---------------------------------------------------------------------------
# Composite pipeline and splitting


def clean_corpus(corpus: ParallelCorpus, rules: NoiseRuleSet | None = None,
                 max_len: int = 50, max_reps: int = 2,
                 length_window: int = 5) -> tuple[ParallelCorpus, CleanReport]:
    """Full cleaning pipeline: noise, exact duplicates, conflicts, length."""
    if rules is None:
        rules = NoiseRuleSet.default()
    c, report = strip_noise(corpus, rules)
    c, r = dedup_exact(c)
    report = report.merged_with(r)
    c, r = drop_conflicting(c, max_reps=max_reps, length_window=length_window)
    report = report.merged_with(r)
    c, r = filter_length(c, max_len=max_len)
    report = report.merged_with(r)
    report.check()
    return c, report


def split_corpus(corpus: ParallelCorpus, n_test: int, n_dev: int,
                 seed: int) -> tuple[ParallelCorpus, ParallelCorpus, ParallelCorpus]:
    """Deterministic shuffle by seed, then take test, then dev; rest is train."""
    if n_test < 0 or n_dev < 0:
        raise ValueError("split sizes must be non-negative")
    if n_test + n_dev >= len(corpus.pairs):
        raise ValueError(
            f"split sizes exceed corpus: test={n_test} + dev={n_dev} >= {len(corpus.pairs)}"
        )
    order = list(range(len(corpus.pairs)))
    random.Random(seed).shuffle(order)
    test = [corpus.pairs[i] for i in order[:n_test]]
    dev = [corpus.pairs[i] for i in order[n_test:n_test + n_dev]]
    train = [corpus.pairs[i] for i in order[n_test + n_dev:]]
    return corpus.with_pairs(train), corpus.with_pairs(test), corpus.with_pairs(dev)


def split_manifest(corpus_lang: str, train: ParallelCorpus, test: ParallelCorpus,
                   dev: ParallelCorpus, seed: int, files: dict | None = None) -> dict:
    """Dataset manifest: language plus train/test/dev counts and the seed."""
    return {
        "language": corpus_lang,
        "train": len(train.pairs),
        "test": len(test.pairs),
        "dev": len(dev.pairs),
        "seed": seed,
        "files": files or {},
    }


def tokenize_basic(text: str, mode: str = "source") -> list[str]:
    """Whitespace+punctuation tokenizer (source) or whitespace split (target).

    Target-side morphology is deferred to BPE, so target mode does not touch
    punctuation. Joining the result with single spaces and re-tokenizing is a
    fixed point in both modes.
    """
    if mode == "target":
        return text.split()
    if mode != "source":
        raise ValueError(f"unknown tokenize mode {mode!r}")
    return _WORD_OR_PUNCT.findall(text)
