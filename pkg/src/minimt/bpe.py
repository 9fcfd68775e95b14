"""Byte-pair encoding: merge learning, segmentation, vocabularies.

Words are split into characters plus a trailing end-of-word marker symbol;
the most frequent adjacent symbol pair is merged repeatedly (ties broken
lexicographically on (left, right) so merge tables are deterministic).
Learning stops at the requested merge count or when the best pair occurs
fewer than twice. Joint multilingual models sum word frequencies across
languages into one table before learning.

Decoding joins subwords and splits words at the marker, so segmentation is
invertible for any sentence over the training character set.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field

from .errors import FormatError

END_MARKER = "</w>"

PAD, UNK, BOS, EOS = 0, 1, 2, 3
SPECIALS = ("<pad>", "<unk>", "<s>", "</s>")


@dataclass(frozen=True)
class BpeModel:
    """Ordered merge table; monolingual or joint multilingual."""

    merges: tuple[tuple[str, str], ...]
    end_marker: str = END_MARKER
    languages: tuple[str, ...] = ()
    target_vocab_size: int = 0

    def __post_init__(self):
        seen = set()
        produced = set()
        for left, right in self.merges:
            if (left, right) in seen:
                raise ValueError(f"duplicate merge pair {(left, right)!r}")
            seen.add((left, right))
            for symbol in (left, right):
                derivable = (
                    len(symbol) == 1
                    or symbol == self.end_marker
                    or symbol in produced
                )
                if not derivable:
                    raise ValueError(
                        f"merge symbol {symbol!r} is not derivable from earlier merges"
                    )
            produced.add(left + right)

    @property
    def num_merges(self) -> int:
        return len(self.merges)

    def merge_ranks(self) -> dict[tuple[str, str], int]:
        return {pair: i for i, pair in enumerate(self.merges)}

    def save(self, path) -> None:
        langs = ",".join(self.languages) if self.languages else "-"
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"{self.end_marker}\t{langs}\t{len(self.merges)}\n")
            for left, right in self.merges:
                f.write(f"{left} {right}\n")

    @classmethod
    def load(cls, path) -> "BpeModel":
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines:
            raise FormatError(f"{path}: empty model file")
        header = lines[0].split("\t")
        if len(header) != 3:
            raise FormatError(f"{path}: bad header {lines[0]!r}")
        marker, langs, count = header
        merges = []
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split(" ")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'left right', got {line!r}")
            merges.append((parts[0], parts[1]))
        if len(merges) != int(count):
            raise FormatError(
                f"{path}: header declares {count} merges, file has {len(merges)}"
            )
        languages = () if langs == "-" else tuple(langs.split(","))
        return cls(tuple(merges), end_marker=marker, languages=languages)


@dataclass(frozen=True)
class Vocab:
    """Bijective token<->id map with PAD/UNK/BOS/EOS at ids 0-3."""

    token_of: tuple[str, ...]
    id_of: dict[str, int] = field(compare=False)

    @classmethod
    def from_tokens(cls, tokens) -> "Vocab":
        all_tokens = tuple(SPECIALS) + tuple(tokens)
        id_of = {tok: i for i, tok in enumerate(all_tokens)}
        if len(id_of) != len(all_tokens):
            raise ValueError("vocabulary tokens must be unique")
        return cls(all_tokens, id_of)

    def __len__(self) -> int:
        return len(self.token_of)

    def id(self, token: str) -> int:
        return self.id_of.get(token, UNK)

    def token(self, idx: int) -> str:
        if not 0 <= idx < len(self.token_of):
            raise IndexError(f"token id {idx} out of range [0, {len(self.token_of)})")
        return self.token_of[idx]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("".join(tok + "\n" for tok in self.token_of[len(SPECIALS):]))

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as f:
            tokens = f.read().splitlines()
        return cls.from_tokens(tokens)


# ---------------------------------------------------------------------------
# Merge learning


def _word_symbols(word: str, end_marker: str) -> tuple[str, ...]:
    return tuple(word) + (end_marker,)


def _pair_counts(seqs: list[list[str]], freqs: list[int]) -> Counter:
    counts: Counter = Counter()
    for symbols, freq in zip(seqs, freqs):
        for pair in zip(symbols, symbols[1:]):
            counts[pair] += freq
    return counts


def _merge_in_word(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    left, right = pair
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def learn_bpe(word_freqs: dict[str, int], num_merges: int,
              end_marker: str = END_MARKER,
              languages: tuple[str, ...] = ()) -> BpeModel:
    """Greedy merge learning over a word->frequency map.

    At each step the globally most frequent adjacent symbol pair is merged
    everywhere; equal counts break lexicographically on (left, right).
    Stops early when the best pair occurs fewer than twice.
    """
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    words = sorted(word_freqs)
    seqs = [list(_word_symbols(w, end_marker)) for w in words]
    freqs = [word_freqs[w] for w in words]
    if any(f < 1 for f in freqs):
        raise ValueError("word frequencies must be >= 1")

    counts = _pair_counts(seqs, freqs)
    # pair -> word indexes that currently contain it, for incremental updates
    index: dict[tuple[str, str], set[int]] = {}
    for wi, symbols in enumerate(seqs):
        for pair in zip(symbols, symbols[1:]):
            index.setdefault(pair, set()).add(wi)

    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        best = None
        best_count = 1
        for pair, count in counts.items():
            if count > best_count or (count == best_count and (best is None or pair < best)):
                best = pair
                best_count = count
        if best is None or best_count < 2:
            break
        merges.append(best)
        for wi in sorted(index.get(best, ())):
            old = seqs[wi]
            new = _merge_in_word(old, best)
            freq = freqs[wi]
            for pair in zip(old, old[1:]):
                counts[pair] -= freq
                if counts[pair] <= 0:
                    del counts[pair]
                group = index.get(pair)
                if group is not None:
                    group.discard(wi)
                    if not group:
                        del index[pair]
            for pair in zip(new, new[1:]):
                counts[pair] = counts.get(pair, 0) + freq
                index.setdefault(pair, set()).add(wi)
            seqs[wi] = new
    return BpeModel(tuple(merges), end_marker=end_marker, languages=languages)


def learn_multibpe(corpora: dict[str, dict[str, int]], num_merges: int,
                   end_marker: str = END_MARKER) -> BpeModel:
    """One merge table over all languages: frequencies summed, then learn_bpe."""
    if not corpora:
        raise ValueError("learn_multibpe needs at least one language corpus")
    if len(corpora) < 2:
        warnings.warn(
            "learn_multibpe called with a single language; "
            "this degenerates to learn_bpe",
            stacklevel=2,
        )
    combined: Counter = Counter()
    for word_freqs in corpora.values():
        combined.update(word_freqs)
    return learn_bpe(
        dict(combined), num_merges,
        end_marker=end_marker,
        languages=tuple(sorted(corpora)),
    )


# ---------------------------------------------------------------------------
# Segmentation


def encode_word(model: BpeModel, word: str,
                ranks: dict[tuple[str, str], int] | None = None) -> list[str]:
    """Split a word into subwords by replaying the merge table in order."""
    if ranks is None:
        ranks = model.merge_ranks()
    symbols = list(_word_symbols(word, model.end_marker))
    while len(symbols) > 1:
        pairs = [(ranks[p], p) for p in zip(symbols, symbols[1:]) if p in ranks]
        if not pairs:
            break
        _, best = min(pairs)
        symbols = _merge_in_word(symbols, best)
    return symbols


class Segmenter:
    """Caches per-word segmentations for repeated corpus encoding."""

    def __init__(self, model: BpeModel):
        self.model = model
        self._ranks = model.merge_ranks()
        self._cache: dict[str, list[str]] = {}

    def word(self, word: str) -> list[str]:
        got = self._cache.get(word)
        if got is None:
            got = encode_word(self.model, word, self._ranks)
            self._cache[word] = got
        return got

    def sentence(self, tokens: list[str]) -> list[str]:
        out: list[str] = []
        for tok in tokens:
            out.extend(self.word(tok))
        return out


def encode_sentence(model: BpeModel, vocab: Vocab, tokens: list[str],
                    framing: bool = False,
                    segmenter: Segmenter | None = None) -> list[int]:
    """Segment a token list and map subwords to ids (unknown -> UNK)."""
    seg = segmenter if segmenter is not None else Segmenter(model)
    ids = [vocab.id(sub) for sub in seg.sentence(tokens)]
    if framing:
        return [BOS] + ids + [EOS]
    return ids


def decode(vocab: Vocab, model: BpeModel, ids: list[int]) -> str:
    """Invert encode_sentence; UNK ids render as a visible placeholder.

    An unknown subword that carried a word-boundary marker loses it, so text
    around UNKs may re-join; exact inversion holds over the training
    character set where no UNKs occur.
    """
    parts = []
    for idx in ids:
        if not 0 <= idx < len(vocab):
            raise IndexError(f"token id {idx} out of range [0, {len(vocab)})")
        if idx in (PAD, BOS, EOS):
            continue
        parts.append(SPECIALS[UNK] if idx == UNK else vocab.token(idx))
    words = "".join(parts).split(model.end_marker)
    if words and words[-1] == "":
        words.pop()
    return " ".join(w for w in words if w)


# ---------------------------------------------------------------------------
# Vocabularies


def _ranked_tokens(counts: Counter, max_size: int) -> list[str]:
    if max_size <= len(SPECIALS):
        raise ValueError(f"max_size must exceed {len(SPECIALS)} (the specials)")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [tok for tok, _ in ranked[: max_size - len(SPECIALS)]]


def build_vocab(model: BpeModel, encoded_corpus, max_size: int) -> Vocab:
    """Rank subwords of an encoded corpus by frequency and truncate.

    ``encoded_corpus`` iterates over subword lists (one per sentence).
    """
    counts: Counter = Counter()
    for subwords in encoded_corpus:
        counts.update(subwords)
    return Vocab.from_tokens(_ranked_tokens(counts, max_size))


def build_vocab_from_tokens(sentences, max_size: int) -> Vocab:
    """Word-level counterpart of build_vocab over plain token lists."""
    counts: Counter = Counter()
    for tokens in sentences:
        counts.update(tokens)
    return Vocab.from_tokens(_ranked_tokens(counts, max_size))


def encode_tokens(vocab: Vocab, tokens: list[str], framing: bool = False) -> list[int]:
    """Word-level id mapping (no segmentation)."""
    ids = [vocab.id(tok) for tok in tokens]
    if framing:
        return [BOS] + ids + [EOS]
    return ids


def decode_tokens(vocab: Vocab, ids: list[int]) -> str:
    """Word-level inverse of encode_tokens; specials are dropped, UNK kept."""
    out = []
    for idx in ids:
        if not 0 <= idx < len(vocab):
            raise IndexError(f"token id {idx} out of range [0, {len(vocab)})")
        if idx in (PAD, BOS, EOS):
            continue
        out.append(vocab.token(idx))
    return " ".join(out)
