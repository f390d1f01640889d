"""Rank-correlation metrics and exact verification of discovered patterns.

Ground truth comes from exhaustive enumeration; a method under evaluation
supplies scores per isomorphism class.  Sampling baselines get score 0 for
classes they never saw, which makes ties routine, so both coefficients fix
a tie convention: average ranks for the rank-difference form, and neither
concordant nor discordant for pair counting.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .dataset import GraphSet
from .errors import ValidationError
from .graphs import TypedDigraph
from .isomorphism import TIMEOUT, count_occurrences
from .patterns import PatternKey

__all__ = [
    "RankEvalReport",
    "TopNReport",
    "relative_frequency",
    "spearman",
    "kendall",
    "rank_eval",
    "verify_top_n",
    "write_rank_report_csv",
]


@dataclass
class RankEvalReport:
    spearman_rho: float
    kendall_tau: float
    n_classes: int
    zero_filled: int
    degenerate: bool = False
    keys: list[PatternKey] | None = None
    truth: np.ndarray | None = None
    scores: np.ndarray | None = None


@dataclass
class TopNReport:
    counts: list[int | object]  # per pattern: int count or TIMEOUT
    mean: float | None
    median: float | None
    cutoff: float
    timeouts: int = 0


def relative_frequency(counts) -> np.ndarray:
    """Counts normalized to sum to one."""
    arr = np.asarray(counts, dtype=np.float64)
    if np.any(arr < 0):
        raise ValidationError("counts must be nonnegative")
    total = arr.sum()
    if total <= 0:
        raise ValidationError("total count is zero")
    return arr / total


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for pos in range(i, j + 1):
            ranks[order[pos]] = avg
        i = j + 1
    return ranks


def spearman(p, f) -> float:
    """Rank-difference coefficient 1 - 6*sum(d^2)/(n(n^2-1)), average ranks."""
    p = np.asarray(p, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if p.shape != f.shape or p.ndim != 1 or len(p) < 2:
        raise ValidationError("need two equal-length vectors with n >= 2")
    d = _average_ranks(p) - _average_ranks(f)
    n = len(p)
    return 1.0 - 6.0 * float(d @ d) / (n * (n * n - 1))


def kendall(p, f) -> float:
    """Pair-concordance coefficient 2(nc - nd)/(n(n-1)); ties count neither."""
    p = np.asarray(p, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if p.shape != f.shape or p.ndim != 1 or len(p) < 2:
        raise ValidationError("need two equal-length vectors with n >= 2")
    n = len(p)
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            s = (p[i] - p[j]) * (f[i] - f[j])
            if s > 0:
                concordant += 1
            elif s < 0:
                discordant += 1
    return 2.0 * (concordant - discordant) / (n * (n - 1))


def rank_eval(
    truth: dict[PatternKey, float],
    scores: dict[PatternKey, float],
    estimator_mode: bool = False,
) -> RankEvalReport:
    """Correlate method scores with ground-truth counts on the truth classes.

    Sampling baselines may miss classes (scored 0, counted in zero_filled);
    with ``estimator_mode`` a missing class is an error instead, since an
    estimator is expected to score everything.  Vectors that end up all-tied
    report 0 with the degenerate flag rather than NaN.
    """
    if not truth:
        raise ValidationError("ground truth is empty")
    keys = sorted(truth, key=lambda k: k.digest)
    truth_vec = np.array([float(truth[k]) for k in keys])
    score_vec = np.empty(len(keys))
    zero_filled = 0
    for i, key in enumerate(keys):
        if key in scores:
            score_vec[i] = float(scores[key])
        elif estimator_mode:
            raise ValidationError(f"estimator produced no score for {key!r}")
        else:
            score_vec[i] = 0.0
            zero_filled += 1
    degenerate = (
        len(keys) < 2
        or np.all(truth_vec == truth_vec[0])
        or np.all(score_vec == score_vec[0])
    )
    if degenerate:
        rho = tau = 0.0
    else:
        rho = spearman(score_vec, truth_vec)
        tau = kendall(score_vec, truth_vec)
    return RankEvalReport(
        spearman_rho=rho,
        kendall_tau=tau,
        n_classes=len(keys),
        zero_filled=zero_filled,
        degenerate=degenerate,
        keys=keys,
        truth=truth_vec,
        scores=score_vec,
    )


def _verify_one(pattern: TypedDigraph, graph_set: GraphSet, cutoff: float):
    deadline = time.monotonic() + cutoff
    total = 0
    if cutoff <= 0:
        return TIMEOUT
    for g in graph_set.graphs:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return TIMEOUT
        got = count_occurrences(pattern, g, cutoff=remaining)
        if got is TIMEOUT:
            return TIMEOUT
        total += got
    return total


def verify_top_n(
    patterns: list[TypedDigraph],
    graph_set: GraphSet,
    cutoff: float = 60.0,
    threads: int | None = None,
) -> TopNReport:
    """Exact occurrence totals per pattern, each under one wall-clock budget.

    A pattern whose total cannot be finished inside ``cutoff`` seconds is
    reported as TIMEOUT and left out of the mean and median.  Patterns are
    independent, so they may be counted on ``threads`` workers; the report
    order always matches the input order.
    """
    if threads and threads > 1 and len(patterns) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(
                lambda p: _verify_one(p, graph_set, cutoff), patterns))
    else:
        counts = [_verify_one(p, graph_set, cutoff) for p in patterns]
    verified = [c for c in counts if c is not TIMEOUT]
    mean = float(np.mean(verified)) if verified else None
    median = float(np.median(verified)) if verified else None
    return TopNReport(
        counts=counts,
        mean=mean,
        median=median,
        cutoff=cutoff,
        timeouts=len(counts) - len(verified),
    )


def write_rank_report_csv(report: RankEvalReport, path) -> None:
    """Per-class rows (key, truth, score, ranks) plus one summary row."""
    if report.keys is None:
        raise ValidationError("report carries no per-class data")
    truth_ranks = _average_ranks(report.truth)
    score_ranks = _average_ranks(report.scores)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class_key", "truth_count", "method_score",
                         "truth_rank", "method_rank"])
        for i, key in enumerate(report.keys):
            writer.writerow([
                key.digest.hex(),
                f"{report.truth[i]:g}",
                f"{report.scores[i]:.10g}",
                f"{truth_ranks[i]:g}",
                f"{score_ranks[i]:g}",
            ])
        writer.writerow([
            "summary",
            f"rho={report.spearman_rho:.6f}",
            f"tau={report.kendall_tau:.6f}",
            f"zero_filled={report.zero_filled}",
            f"degenerate={int(report.degenerate)}",
        ])
