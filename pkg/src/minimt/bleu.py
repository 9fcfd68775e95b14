"""Corpus-level BLEU with an auditable per-order breakdown.

Score = brevity penalty times the geometric mean of the modified n-gram
precisions for orders 1..4, computed corpus-wide (clipped matches and
totals summed over all pairs before dividing). Stored scores live on the
[0, 1] scale; CLI output reports percent.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass


def ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _as_reference_lists(references):
    """Normalize references: each entry is a token list or a list of them."""
    out = []
    for ref in references:
        if ref and isinstance(ref[0], (list, tuple)):
            out.append([list(r) for r in ref])
        else:
            out.append([list(ref)])
    return out


def modified_precision(hypotheses, references, n: int) -> tuple[int, int]:
    """Corpus-wide clipped n-gram matches and total hypothesis n-grams."""
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    if n < 1:
        raise ValueError("n-gram order must be >= 1")
    matches = 0
    total = 0
    for hyp, refs in zip(hypotheses, _as_reference_lists(references)):
        hyp_counts = ngram_counts(hyp, n)
        max_ref: Counter = Counter()
        for ref in refs:
            for gram, count in ngram_counts(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        for gram, count in hyp_counts.items():
            matches += min(count, max_ref[gram])
            total += count
    return matches, total


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len < 0 or ref_len < 0:
        raise ValueError("lengths must be >= 0")
    if hyp_len == 0:
        return 0.0
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / hyp_len)


def _closest_ref_len(hyp_len: int, ref_lens) -> int:
    # standard effective reference length: closest, ties to the shorter
    return min(ref_lens, key=lambda r: (abs(r - hyp_len), r))


@dataclass
class BleuReport:
    precisions: list[float]
    matches: list[int]
    totals: list[int]
    brevity_penalty: float
    score: float
    hyp_len: int
    ref_len: int
    smoothing: str = "none"

    @property
    def percent(self) -> float:
        return self.score * 100.0

    def recomputed_score(self) -> float:
        """Score from the stored precisions and penalty; audit hook."""
        if any(p <= 0.0 for p in self.precisions):
            return 0.0
        log_mean = sum(math.log(p) for p in self.precisions) / len(self.precisions)
        return self.brevity_penalty * math.exp(log_mean)

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "percent": self.percent,
            "precisions": self.precisions,
            "matches": self.matches,
            "totals": self.totals,
            "brevity_penalty": self.brevity_penalty,
            "hyp_len": self.hyp_len,
            "ref_len": self.ref_len,
            "smoothing": self.smoothing,
        }


def corpus_bleu(hypotheses, references, max_n: int = 4,
                smoothing: str = "none") -> BleuReport:
    """Corpus BLEU over aligned token lists.

    smoothing="none" gives 0 whenever an order has no matches;
    smoothing="add1" replaces zero-match orders with (m+1)/(t+1), offered
    for sentence-level debugging only.
    """
    if smoothing not in ("none", "add1"):
        raise ValueError(f"unknown smoothing {smoothing!r}")
    if not hypotheses:
        raise ValueError("corpus_bleu needs a non-empty corpus")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    ref_lists = _as_reference_lists(references)
    hyp_len = sum(len(h) for h in hypotheses)
    ref_len = sum(
        _closest_ref_len(len(h), [len(r) for r in refs])
        for h, refs in zip(hypotheses, ref_lists)
    )

    matches_by_n = []
    totals_by_n = []
    precisions = []
    for n in range(1, max_n + 1):
        m, t = modified_precision(hypotheses, references, n)
        matches_by_n.append(m)
        totals_by_n.append(t)
        if smoothing == "add1" and m == 0:
            precisions.append((m + 1) / (t + 1))
        else:
            precisions.append(m / t if t > 0 else 0.0)

    bp = brevity_penalty(hyp_len, ref_len)
    if any(p <= 0.0 for p in precisions):
        score = 0.0
    else:
        log_mean = sum(math.log(p) for p in precisions) / max_n
        score = bp * math.exp(log_mean)
    return BleuReport(
        precisions=precisions,
        matches=matches_by_n,
        totals=totals_by_n,
        brevity_penalty=bp,
        score=score,
        hyp_len=hyp_len,
        ref_len=ref_len,
        smoothing=smoothing,
    )
