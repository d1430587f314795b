"""Page-selection heuristics that collapse a site to one content block.

Three strategies, keyed by stable integer codes:
  1 = prefer the About page, falling back to the shortest URL
  2 = shortest URL
  3 = shortest URL plus regex filtering of the chosen content
"""

import math
import re
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional

from .errors import EmptySite, InvalidPattern
from .ingest import PageRecord, SiteDocument
from .tokens import TokenizerHandle, count_tokens
from .urlnorm import NormalizedUrl


class HeuristicId(IntEnum):
    ABOUT_PRIORITY = 1
    SHORTEST_URL = 2
    SHORTEST_URL_FILTERED = 3


DEFAULT_ABOUT_TOKENS = frozenset(
    {"about", "about-us", "aboutus", "about_us", "who-we-are"}
)

DEFAULT_MAX_CONTENT_TOKENS = 8000


@dataclass(frozen=True)
class Selection:
    heuristic: HeuristicId
    chosen_url: NormalizedUrl
    content: str
    original_token_estimate: int
    reduced_token_estimate: int


@dataclass(frozen=True)
class FilterRule:
    name: str
    pattern: str
    replacement: str

    def compiled(self):
        try:
            return re.compile(self.pattern)
        except re.error as exc:
            raise InvalidPattern(f"rule {self.name!r}: {exc}") from exc


# Order matters: pipe-separated nav fragments are split into lines
# before the line-level rules run; whitespace collapse comes last.
DEFAULT_FILTER_RULES = [
    FilterRule("nav-separators", r"[ \t]*\|[ \t]*", "\n"),
    FilterRule(
        "short-lines",
        r"(?m)^[^\S\n]*(?:\S+(?:[^\S\n]+\S+)?)?[^\S\n]*$\n?",
        "",
    ),
    FilterRule(
        "boilerplate-lines",
        r"(?mi)^.*(?:copyright|©|all rights reserved|cookie).*$\n?",
        "",
    ),
    FilterRule("symbol-runs", r"[^\w\s]{6,}", ""),
    FilterRule("whitespace", r"\s+", " "),
]


def load_filter_rules(path) -> List[FilterRule]:
    """Load rules from a text file, one per line: name<TAB>pattern<TAB>replacement."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise InvalidPattern(
                    f"{path}:{lineno}: expected name<TAB>pattern<TAB>replacement"
                )
            rule = FilterRule(*parts)
            rule.compiled()  # validate at load time
            rules.append(rule)
    return rules


def apply_reduction_filters(text: str, rules: Optional[List[FilterRule]] = None) -> str:
    """Apply regex rules in order, globally, then strip the edges."""
    if rules is None:
        rules = DEFAULT_FILTER_RULES
    for rule in rules:
        text = rule.compiled().sub(rule.replacement, text)
    return text.strip()


def _estimate(text: str, tok: Optional[TokenizerHandle]) -> int:
    if tok is not None:
        return count_tokens(text, tok)
    return math.ceil(len(text) / 4)


def _truncate(text: str, max_tokens: int, tok: Optional[TokenizerHandle]) -> str:
    if max_tokens <= 0:
        return text
    if tok is None:
        return text[: max_tokens * 4]
    # binary-chop on characters; exact token-boundary cuts are not needed
    while count_tokens(text, tok) > max_tokens:
        text = text[: int(len(text) * 0.9)]
    return text


def _shortest_page(pages: List[PageRecord]) -> PageRecord:
    return min(pages, key=lambda p: (len(p.url.url), p.url.url))


def select_shortest_url(
    site: SiteDocument,
    tok: Optional[TokenizerHandle] = None,
    max_tokens: int = DEFAULT_MAX_CONTENT_TOKENS,
) -> Selection:
    """Pick the page with the shortest normalized URL (ties: lexicographic)."""
    if not site.pages:
        raise EmptySite(site.source_file)
    page = _shortest_page(site.pages)
    original = _estimate(page.body_text, tok)
    content = _truncate(page.body_text, max_tokens, tok)
    return Selection(
        heuristic=HeuristicId.SHORTEST_URL,
        chosen_url=page.url,
        content=content,
        original_token_estimate=original,
        reduced_token_estimate=min(original, _estimate(content, tok)),
    )


def _is_about_page(page: PageRecord, about_tokens) -> bool:
    segments = [s.lower() for s in page.url.path.split("/") if s]
    return any(seg in about_tokens for seg in segments)


def select_about_priority(
    site: SiteDocument,
    about_tokens=DEFAULT_ABOUT_TOKENS,
    tok: Optional[TokenizerHandle] = None,
    max_tokens: int = DEFAULT_MAX_CONTENT_TOKENS,
) -> Selection:
    """Prefer an About page; fall back to the shortest URL when none exists."""
    if not site.pages:
        raise EmptySite(site.source_file)
    candidates = [p for p in site.pages if _is_about_page(p, about_tokens)]
    if not candidates:
        sel = select_shortest_url(site, tok, max_tokens)
        return Selection(
            heuristic=HeuristicId.ABOUT_PRIORITY,
            chosen_url=sel.chosen_url,
            content=sel.content,
            original_token_estimate=sel.original_token_estimate,
            reduced_token_estimate=sel.reduced_token_estimate,
        )
    page = _shortest_page(candidates)
    original = _estimate(page.body_text, tok)
    content = _truncate(page.body_text, max_tokens, tok)
    return Selection(
        heuristic=HeuristicId.ABOUT_PRIORITY,
        chosen_url=page.url,
        content=content,
        original_token_estimate=original,
        reduced_token_estimate=min(original, _estimate(content, tok)),
    )


def select_shortest_url_filtered(
    site: SiteDocument,
    rules: Optional[List[FilterRule]] = None,
    tok: Optional[TokenizerHandle] = None,
    max_tokens: int = DEFAULT_MAX_CONTENT_TOKENS,
) -> Selection:
    """Shortest URL, then regex filters over its content."""
    base = select_shortest_url(site, tok, max_tokens=0)
    filtered = apply_reduction_filters(base.content, rules)
    filtered = _truncate(filtered, max_tokens, tok)
    return Selection(
        heuristic=HeuristicId.SHORTEST_URL_FILTERED,
        chosen_url=base.chosen_url,
        content=filtered,
        original_token_estimate=base.original_token_estimate,
        reduced_token_estimate=min(
            base.original_token_estimate, _estimate(filtered, tok)
        ),
    )


def select(
    site: SiteDocument,
    heuristic: HeuristicId,
    rules: Optional[List[FilterRule]] = None,
    tok: Optional[TokenizerHandle] = None,
    max_tokens: int = DEFAULT_MAX_CONTENT_TOKENS,
) -> Selection:
    """Dispatch by heuristic code."""
    if heuristic == HeuristicId.ABOUT_PRIORITY:
        return select_about_priority(site, tok=tok, max_tokens=max_tokens)
    if heuristic == HeuristicId.SHORTEST_URL:
        return select_shortest_url(site, tok=tok, max_tokens=max_tokens)
    if heuristic == HeuristicId.SHORTEST_URL_FILTERED:
        return select_shortest_url_filtered(site, rules, tok, max_tokens)
    raise ValueError(f"unknown heuristic {heuristic!r}")
