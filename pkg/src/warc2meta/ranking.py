"""Per-combination scoring and ranked aggregation.

Each prompt x heuristic combination gets three criteria: median title
edit distance (lower is better), median abstract embedding-similarity
F1 (higher is better), and its population standard deviation (lower is
better). Competition ranks per criterion are summed, and the sum is
ranked again to give the final score; tied sums share a score, so more
than one combination can hold score 1.
"""

import statistics
from dataclasses import dataclass
from typing import Dict, List, Sequence

from .client import GeneratedMetadata, combination_id
from .errors import InsufficientCombinations, NoOverlap
from .heuristics import HeuristicId
from .metrics import EmbeddingProvider, bertscore, levenshtein
from .prompts import PromptVariant


@dataclass(frozen=True)
class ScorePair:
    site_id: str
    title_levenshtein: int
    title_bertscore_f1: float
    abstract_bertscore_f1: float


@dataclass(frozen=True)
class CombinationStats:
    combination_id: int
    prompt: PromptVariant
    heuristic: HeuristicId
    lev_median: float
    bs_median: float
    bs_std: float
    n: int
    unmatched: int = 0


@dataclass(frozen=True)
class RankedCombination:
    stats: CombinationStats
    rank_lev: int
    rank_bs: int
    rank_std: int
    rank_sum: int
    final_score: int


def score_pairs(
    generated: Sequence[GeneratedMetadata],
    reference: Sequence[GeneratedMetadata],
    provider: EmbeddingProvider,
) -> List[ScorePair]:
    """Inner-join generated and reference rows on site_id and score each pair."""
    ref_by_id: Dict[str, GeneratedMetadata] = {r.site_id: r for r in reference}
    pairs = []
    for gen in generated:
        ref = ref_by_id.get(gen.site_id)
        if ref is None:
            continue
        _, _, title_f1 = bertscore(gen.title, ref.title, provider)
        _, _, abstract_f1 = bertscore(gen.abstract, ref.abstract, provider)
        pairs.append(
            ScorePair(
                site_id=gen.site_id,
                title_levenshtein=levenshtein(gen.title, ref.title),
                title_bertscore_f1=title_f1,
                abstract_bertscore_f1=abstract_f1,
            )
        )
    return pairs


def score_combination(
    generated: Sequence[GeneratedMetadata],
    reference: Sequence[GeneratedMetadata],
    provider: EmbeddingProvider,
    prompt: PromptVariant = None,
    heuristic: HeuristicId = None,
) -> CombinationStats:
    """Aggregate per-site scores into medians and dispersion."""
    pairs = score_pairs(generated, reference, provider)
    if not pairs:
        raise NoOverlap("no site_id overlap between generated and reference")
    abstract_f1s = [p.abstract_bertscore_f1 for p in pairs]
    combo = (
        combination_id(prompt, heuristic)
        if prompt is not None and heuristic is not None
        else -1
    )
    return CombinationStats(
        combination_id=combo,
        prompt=prompt,
        heuristic=heuristic,
        lev_median=statistics.median(p.title_levenshtein for p in pairs),
        bs_median=statistics.median(abstract_f1s),
        bs_std=statistics.pstdev(abstract_f1s),
        n=len(pairs),
        unmatched=len(generated) - len(pairs),
    )


def _competition_ranks(values: Sequence, reverse: bool = False) -> List[int]:
    """1-based competition ranks; ties share the minimum rank (1,1,3,...)."""
    order = sorted(values, reverse=reverse)
    return [order.index(v) + 1 for v in values]


def rank_combinations(all_stats: Sequence[CombinationStats]) -> List[RankedCombination]:
    """Rank per criterion, sum, and rank the sums into final scores."""
    if len(all_stats) < 2:
        raise InsufficientCombinations("need at least 2 combinations to rank")
    rank_lev = _competition_ranks([s.lev_median for s in all_stats])
    rank_bs = _competition_ranks([s.bs_median for s in all_stats], reverse=True)
    rank_std = _competition_ranks([s.bs_std for s in all_stats])
    sums = [a + b + c for a, b, c in zip(rank_lev, rank_bs, rank_std)]
    finals = _competition_ranks(sums)
    ranked = [
        RankedCombination(
            stats=s,
            rank_lev=rank_lev[i],
            rank_bs=rank_bs[i],
            rank_std=rank_std[i],
            rank_sum=sums[i],
            final_score=finals[i],
        )
        for i, s in enumerate(all_stats)
    ]
    ranked.sort(key=lambda r: (r.final_score, r.stats.combination_id))
    return ranked
