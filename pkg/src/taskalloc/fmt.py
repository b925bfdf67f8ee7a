"""Shared text conventions for prompts, rendered decisions, and rubrics."""

from __future__ import annotations

import re


def fmt_pct(rate: float) -> str:
    """Render a [0,1] rate as a percentage with up to two decimals.

    Trailing zeros are dropped: 0.8 -> "80%", 0.7333 -> "73.33%".
    """
    text = f"{rate * 100.0:.2f}".rstrip("0").rstrip(".")
    return text + "%"


def parse_pct(text: str) -> float:
    """Inverse of fmt_pct: "80%" -> 0.80. Raises ValueError on junk."""
    return float(text.strip().rstrip("%")) / 100.0


def fmt_num(value: float, decimals: int = 2) -> str:
    """Render a number trimming trailing zeros: -12.0 -> "-12", 41.67 -> "41.67"."""
    return f"{value:.{decimals}f}".rstrip("0").rstrip(".")


_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")


def sentence_count(text: str) -> int:
    """Count sentences by terminal punctuation followed by whitespace or
    end-of-text, so decimals like "41.7" do not split a sentence. A trailing
    unterminated fragment counts as one sentence."""
    t = text.strip()
    if not t:
        return 0
    n = len(_SENTENCE_END.findall(t))
    if n == 0:
        return 1
    if not re.search(r"[.!?]+$", t):
        n += 1
    return n
