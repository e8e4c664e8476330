"""Numerical checks of the consistency properties of the adaptive bound.

Random streams
--------------
Every draw comes from NumPy's counter-based Philox generator.  A run with
seed ``s`` is split into chunks of :data:`CHUNK_SIZE` replicates; the chunk
with index ``c`` for grid point ``i`` and regime ``r`` (0 = null,
1 = alternative) uses

    Generator(Philox(SeedSequence(s, spawn_key=(i, r, c))))

Chunks only contribute counts, and counts are summed, so the report does not
depend on how chunks are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._validation import DomainError, check_int, check_positive
from .calibration import (
    INV_E,
    arlb_self_calibration_limit,
    log_arlb_odds,
    log_robust_lower_bound,
    robust_lower_bound,
)
from .specfun import normal_cdf, normal_isf_log, normal_logsf, normal_quantile

__all__ = [
    "CHUNK_SIZE",
    "SimulationConfig",
    "make_generator",
    "simulate_log_pvalue",
    "simulate_pvalue",
    "Theorem2Row",
    "Theorem2Report",
    "verify_theorem2",
    "Theorem3Report",
    "verify_theorem3",
    "LemmaReport",
    "check_lemma1",
    "check_lemma2",
    "LEMMA2_UPPER",
    "SelfCalibrationReport",
    "self_calibration_scan",
]

CHUNK_SIZE = 4096
NULL, ALTERNATIVE = 0, 1


def make_generator(seed: int, *key: int) -> np.random.Generator:
    """Philox stream for ``seed`` and the sub-stream coordinates ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class SimulationConfig:
    reps: int = 10_000
    n_grid: tuple[int, ...] = (100, 1_000, 10_000)
    delta: float = 0.5
    w_threshold: float = 1.0
    seed: int = 20171116
    alt_w_threshold: float | None = None
    n_jobs: int = 1
    stabilizer: str = "exact"

    def __post_init__(self):
        check_int("reps", self.reps)
        grid = tuple(check_int("n_grid", n) for n in self.n_grid)
        if not grid:
            raise DomainError("n_grid", "must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("n_grid", f"must be strictly increasing, got {grid}")
        object.__setattr__(self, "n_grid", grid)
        check_positive("delta", self.delta, allow_zero=True)
        check_positive("w_threshold", self.w_threshold)
        if self.alt_w_threshold is not None:
            check_positive("alt_w_threshold", self.alt_w_threshold)
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed", "must be a 64-bit unsigned integer")
        check_int("n_jobs", self.n_jobs)
        if self.stabilizer not in ("exact", "asymptotic"):
            raise DomainError("stabilizer", f"expected 'exact' or 'asymptotic', got {self.stabilizer!r}")

    @property
    def alt_threshold(self) -> float:
        return self.w_threshold if self.alt_w_threshold is None else self.alt_w_threshold


def simulate_log_pvalue(delta: float, n: int, rng: np.random.Generator, size: int | None = None):
    """``log`` of one-sided z-test p-values when the standardized effect is ``delta``.

    Draws ``z ~ N(sqrt(n) delta, 1)`` and returns ``log(1 - Phi(z))``.  Under
    ``delta = 0`` the p-values are uniform.
    """
    z = rng.standard_normal(size) + math.sqrt(n) * delta
    if size is None:
        return normal_logsf(float(z))
    return np.array([normal_logsf(float(v)) for v in z])


def simulate_pvalue(delta: float, n: int, rng: np.random.Generator) -> float:
    """One p-value with law ``1 - Phi(Z_p - sqrt(n) delta)``.

    Values below the smallest double come back as ``0.0``; use
    :func:`simulate_log_pvalue` in that regime.
    """
    return math.exp(simulate_log_pvalue(delta, n, rng))


@dataclass(frozen=True)
class Theorem2Row:
    n: int
    regime: str
    W: float
    empirical_prob: float
    analytic_bound: float
    mc_stderr: float
    count: int
    reps: int
    exact_prob: float = math.nan


@dataclass
class Theorem2Report:
    config: SimulationConfig
    rows: list[Theorem2Row] = field(default_factory=list)

    def by_regime(self, regime: str) -> list[Theorem2Row]:
        return [r for r in self.rows if r.regime == regime]

    def matches_exact(self, n_se: float = 3.0) -> bool:
        """Empirical frequencies agree with the exact probabilities within ``n_se`` standard errors."""
        return all(abs(r.empirical_prob - r.exact_prob)
                   <= n_se * max(r.mc_stderr, math.sqrt(r.exact_prob * (1 - r.exact_prob) / r.reps), 1.0 / r.reps)
                   for r in self.rows)

    def null_bound_holds(self, n_se: float = 3.0) -> bool:
        return all(r.empirical_prob <= r.analytic_bound + n_se * r.mc_stderr
                   for r in self.by_regime("null"))

    def trend_holds(self, regime: str, n_se: float = 2.0) -> bool:
        """Failure frequency non-increasing along the grid, up to ``n_se`` standard errors."""
        rows = self.by_regime(regime)
        return all(b.empirical_prob <= a.empirical_prob + n_se * math.hypot(a.mc_stderr, b.mc_stderr)
                   for a, b in zip(rows, rows[1:]))

    @property
    def passed(self) -> bool:
        return (self.null_bound_holds() and self.trend_holds("null")
                and self.trend_holds("alternative") and self.matches_exact())

    def to_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "regime", "W", "empirical_prob", "analytic_bound", "mc_stderr", "exact_prob"])
        for r in self.rows:
            w.writerow([r.n, r.regime, _fmt(r.W, precision), _fmt(r.empirical_prob, precision),
                        _fmt(r.analytic_bound, precision), _fmt(r.mc_stderr, precision),
                        _fmt(r.exact_prob, precision)])
        return buf.getvalue()


def _fmt(x: float, precision: int) -> str:
    return f"{x:.{precision}g}" if x != 0 and abs(x) < 10 ** -precision else f"{x:.{precision}f}"


def _null_bound(w: float, n: int) -> float:
    # P(p <= (W/e) sqrt(log n / n)) for uniform p
    return min(1.0, (w / math.e) * math.sqrt(math.log(n) / n))


def _alt_bound(w: float, n: int, delta: float) -> float:
    # Phi(sqrt(-2 log c) - sqrt(n) delta), c = (W/e) sqrt(log n / n); needs c < 0.345
    c = (w / math.e) * math.sqrt(math.log(n) / n)
    if not c < 1.0 - normal_cdf(1.0 / math.sqrt(2.0 * math.pi)):
        return 1.0
    return normal_cdf(math.sqrt(-2.0 * math.log(c)) - math.sqrt(n) * delta)


def _odds_fn(stabilizer: str):
    if stabilizer == "exact":
        return lambda log_p, n: log_arlb_odds(log_p, 1, n)
    # B_L(p) sqrt(n / log n), the simplified odds used in the consistency argument
    return lambda log_p, n: log_robust_lower_bound(log_p) + 0.5 * math.log(n / math.log(n))


def _capped_log_odds(odds, log_p: float, n: int) -> float:
    # the bound is only valid below 1/e; above it the odds stay at their value at 1/e
    return odds(min(log_p, -1.0), n)


def _critical_log_p(odds, log_w: float, n: int) -> float:
    """``log p*`` where the capped odds cross ``W``; the odds increase in ``p``.

    Returns ``0.0`` when the odds stay at or below ``W`` for every ``p``.
    """
    if _capped_log_odds(odds, -1.0, n) <= log_w:
        return 0.0
    lo, hi = -1.0, -1.0
    while _capped_log_odds(odds, lo, n) > log_w:
        hi, lo = lo, 2.0 * lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _capped_log_odds(odds, mid, n) > log_w:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * abs(hi):
            break
    return 0.5 * (lo + hi)


def _exact_prob(odds, regime: int, log_w: float, n: int, delta: float) -> float:
    log_p_star = _critical_log_p(odds, log_w, n)
    if regime == NULL:
        # uniform p: P(O_L <= W) = p*
        return math.exp(log_p_star)
    if log_p_star == 0.0:
        return 0.0
    # P(O_L >= W | H1) = P(p >= p*) = P(z <= z*), z ~ N(sqrt(n) delta, 1)
    return normal_cdf(normal_isf_log(log_p_star) - math.sqrt(n) * delta)


def _count_chunk(seed: int, grid_index: int, regime: int, chunk: int, size: int,
                 n: int, delta: float, log_w: float, stabilizer: str) -> int:
    rng = make_generator(seed, grid_index, regime, chunk)
    odds = _odds_fn(stabilizer)
    log_p = simulate_log_pvalue(delta if regime == ALTERNATIVE else 0.0, n, rng, size)
    log_o = np.array([_capped_log_odds(odds, float(lp), n) for lp in log_p])
    if regime == NULL:
        return int(np.count_nonzero(log_o <= log_w))
    return int(np.count_nonzero(log_o >= log_w))


def verify_theorem2(cfg: SimulationConfig) -> Theorem2Report:
    """Monte Carlo frequencies of the wrong decision on each side, ``q = 1``.

    ``null`` rows estimate ``P(O_L <= W | H0)`` next to the bound
    ``(W/e) sqrt(log n / n)``; ``alternative`` rows estimate
    ``P(O_L >= W' | H1)`` at effect ``delta`` next to the normal-tail bound
    built from the quantile inequality.  Both should shrink as ``n`` grows.

    P-values above ``1/e`` are evaluated at ``1/e``, where the robust bound
    reaches its maximum of one.  Below ``1/e`` the odds increase with ``p``,
    so each row also carries the exact probability of the counted event.

    ``cfg.stabilizer`` picks the odds: ``"exact"`` is ``B_L g_1(n)`` and
    ``"asymptotic"`` is ``B_L sqrt(n / log n)``.
    """
    tasks = []
    for i, n in enumerate(cfg.n_grid):
        for regime, w in ((NULL, cfg.w_threshold), (ALTERNATIVE, cfg.alt_threshold)):
            for chunk, start in enumerate(range(0, cfg.reps, CHUNK_SIZE)):
                size = min(CHUNK_SIZE, cfg.reps - start)
                tasks.append((cfg.seed, i, regime, chunk, size, n, cfg.delta, math.log(w),
                              cfg.stabilizer))
    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            counts = list(pool.map(lambda t: _count_chunk(*t), tasks))
    else:
        counts = [_count_chunk(*t) for t in tasks]

    totals: dict[tuple[int, int], int] = {}
    for task, count in zip(tasks, counts):
        totals[task[1], task[2]] = totals.get((task[1], task[2]), 0) + count

    report = Theorem2Report(cfg)
    odds = _odds_fn(cfg.stabilizer)
    for i, n in enumerate(cfg.n_grid):
        for regime, name, w in ((NULL, "null", cfg.w_threshold),
                                (ALTERNATIVE, "alternative", cfg.alt_threshold)):
            count = totals[i, regime]
            prob = count / cfg.reps
            bound = _null_bound(w, n) if regime == NULL else _alt_bound(w, n, cfg.delta)
            report.rows.append(Theorem2Row(
                n=n, regime=name, W=w, empirical_prob=prob, analytic_bound=bound,
                mc_stderr=math.sqrt(prob * (1.0 - prob) / cfg.reps), count=count, reps=cfg.reps,
                exact_prob=_exact_prob(odds, regime, math.log(w), n, cfg.delta)))
    return report


@dataclass
class Theorem3Report:
    n_star: float
    q: int
    p_grid: list[float]
    o_l: list[float]
    o_l_growing_n: list[tuple[float, float]]

    @property
    def decreasing(self) -> bool:
        tail = [o for p, o in zip(self.p_grid, self.o_l) if p < math.exp(-2.0)]
        return all(b < a for a, b in zip(tail, tail[1:]))

    @property
    def passed(self) -> bool:
        if not self.decreasing:
            return False
        return self.p_grid[-1] > 1e-15 or self.o_l[-1] < 1e-12

    def to_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "n_star", "q", "o_l"])
        for p, o in zip(self.p_grid, self.o_l):
            w.writerow([f"{p:.{precision}g}", _fmt(self.n_star, precision), self.q, f"{o:.{precision}g}"])
        return buf.getvalue()


def verify_theorem3(n_star: float = 100.0, q: int = 1,
                    p_grid: Sequence[float] | None = None) -> Theorem3Report:
    """``O_L`` along a p-value sequence shrinking to zero at fixed ``n*``.

    Also records ``O_L`` at a fixed ``p`` for growing ``n*``; that sequence
    grows.
    """
    check_positive("n_star", n_star)
    q = check_int("q", q)
    if p_grid is None:
        p_grid = [10.0 ** -k for k in range(2, 16)]
    p_grid = [float(p) for p in p_grid]
    if any(b >= a for a, b in zip(p_grid, p_grid[1:])):
        raise DomainError("p_grid", "must be strictly decreasing")
    o_l = [math.exp(log_arlb_odds(math.log(p), q, n_star)) for p in p_grid]
    contrast_p = 0.01
    growing = [(n, math.exp(log_arlb_odds(math.log(contrast_p), q, n, floor_at_rlb=False)))
               for n in (10.0, 100.0, 1e3, 1e4, 1e5)]
    return Theorem3Report(n_star, q, p_grid, o_l, growing)


@dataclass
class LemmaReport:
    lemma: int
    samples: int
    violations: int
    worst_margin: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_csv(self, precision: int = 6) -> str:
        return ("check,samples,violations,worst_margin,passed\n"
                f"lemma{self.lemma},{self.samples},{self.violations},"
                f"{self.worst_margin:.{precision}g},{str(self.passed).lower()}\n")


def check_lemma1(samples: int = 100_000, rng: np.random.Generator | None = None) -> LemmaReport:
    """``B_L(p) >= e p > p`` on ``(0, 1/e)``.

    Uniform draws plus the edge points ``1e-300`` and ``1/e - 1e-12``.
    ``worst_margin`` is the smallest ``B_L(p) / (e p) - 1`` seen.
    """
    samples = check_int("samples", samples)
    rng = rng if rng is not None else make_generator(1)
    draws = rng.uniform(0.0, INV_E, samples)
    points = [p for p in draws if p > 0.0] + [1e-300, INV_E - 1e-12]
    violations = 0
    worst = math.inf
    for p in points:
        b = robust_lower_bound(p)
        ep = math.e * p
        if not (b >= ep and ep > p):
            violations += 1
        worst = min(worst, b / ep - 1.0)
    return LemmaReport(1, len(points), violations, worst)


LEMMA2_UPPER = 1.0 - normal_cdf(1.0 / math.sqrt(2.0 * math.pi))


def check_lemma2(samples: int = 100_000, rng: np.random.Generator | None = None) -> LemmaReport:
    """``Phi^-1(1 - p) < sqrt(-2 log p)`` for ``1e-12 < p < 1 - Phi(1/sqrt(2 pi))``.

    Half of the draws are uniform on the interval and half log-uniform, so
    the deep tail is exercised too.  ``worst_margin`` is the smallest
    ``sqrt(-2 log p) - z`` seen.
    """
    samples = check_int("samples", samples)
    rng = rng if rng is not None else make_generator(2)
    lo = 1e-12
    half = samples // 2
    uniform = rng.uniform(lo, LEMMA2_UPPER, half)
    log_uniform = np.exp(rng.uniform(math.log(lo), math.log(LEMMA2_UPPER), samples - half))
    violations = 0
    worst = math.inf
    for p in np.concatenate([uniform, log_uniform]):
        p = float(p)
        if not lo < p < LEMMA2_UPPER:
            continue
        z = -normal_quantile(p)
        margin = math.sqrt(-2.0 * math.log(p)) - z
        if not margin > 0.0:
            violations += 1
        worst = min(worst, margin)
    return LemmaReport(2, samples, violations, worst)


@dataclass
class SelfCalibrationReport:
    """``B_L(alpha_n(q)) g_q(n)`` over a grid of ``n``.

    Records how far the values end up from one and from ``e/2``, the two
    candidate limits.
    """

    alpha: float
    q: int
    n_grid: list[float]
    values: list[float]

    @property
    def last(self) -> float:
        return self.values[-1]

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.values, self.values[1:]))

    @property
    def limit_estimate(self) -> str:
        d1 = abs(self.last - 1.0)
        d_e2 = abs(self.last - math.e / 2.0)
        return "1" if d1 < d_e2 else "e/2"

    def to_csv(self, precision: int = 6) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n_star", "q", "alpha", "value", "distance_to_1", "distance_to_e_over_2"])
        for n, v in zip(self.n_grid, self.values):
            w.writerow([f"{n:.{precision}g}", self.q, self.alpha, f"{v:.{precision}f}",
                        f"{abs(v - 1.0):.{precision}f}", f"{abs(v - math.e / 2.0):.{precision}f}"])
        return buf.getvalue()


def self_calibration_scan(alpha: float = 0.05, q: int = 1,
                          n_grid: Sequence[float] | None = None) -> SelfCalibrationReport:
    if n_grid is None:
        n_grid = [10.0 ** k for k in range(4, 13)]
    values = [arlb_self_calibration_limit(alpha, q, n) for n in n_grid]
    return SelfCalibrationReport(alpha, q, list(n_grid), values)
