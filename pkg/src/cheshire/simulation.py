"""Event-by-event Monte Carlo of the cat experiment and its moment estimators.

Random streams come from numpy's counter-based Philox generator. Chunk ``i``
of a run draws from the stream keyed by ``SeedSequence(seed, spawn_key=(i,))``,
so chunks can be sampled in any order or in parallel. Each chunk is consumed
in blocks of :data:`BLOCK_SIZE` events, and block and chunk statistics are
merged in ascending order. The result is therefore a pure function of
``(params, seed, n_chunks)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .model import (PROB_LEFT, PROB_TAIL_UP, SHIFT, Event, ModelParams, Path, Tail,
                    noise_prob_cat, noise_prob_tail, validate)

BLOCK_SIZE = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    n_events: int
    seed: int = 0
    n_chunks: int = 1

    def check(self) -> "SimConfig":
        if self.n_events < 1:
            raise ValueError("n_events must be at least 1")
        if self.n_chunks < 1:
            raise ValueError("n_chunks must be at least 1")
        if self.n_events < self.n_chunks:
            raise ValueError("n_events must be at least n_chunks")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return self


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Independent Philox stream for one chunk of a run."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def sample_event(rng: np.random.Generator, params: ModelParams, *, path: Optional[Path] = None,
                 tail: Optional[Tail] = None, x0: Optional[float] = None,
                 y0: Optional[float] = None, noise_c: Optional[bool] = None,
                 noise_t: Optional[bool] = None) -> Event:
    """Sample one run of the experiment.

    Any keyword given fixes that draw instead of sampling it, which lets tests
    steer the event through a chosen branch.
    """
    if path is None:
        path = Path.LEFT if rng.random() < PROB_LEFT else Path.RIGHT
    if tail is None:
        tail = Tail.UP if rng.random() < PROB_TAIL_UP else Tail.DOWN
    if x0 is None:
        x0 = float(rng.normal(0.0, params.Delta))
    if y0 is None:
        y0 = float(rng.normal(0.0, params.Delta))
    x, y = Event.readouts(path, tail, x0, y0)
    # both detectors draw every time, even the one the cat cannot hear
    if noise_c is None:
        noise_c = bool(rng.random() < noise_prob_cat(x, params))
    if noise_t is None:
        noise_t = bool(rng.random() < noise_prob_tail(y, params))
    heard = noise_c if path is Path.LEFT else noise_t
    b = heard or bool(rng.random() < params.p)
    return Event(path, tail, x0, y0, x, y, noise_c, noise_t, heard, b)


def sample_events(rng: np.random.Generator, params: ModelParams, n: int) -> dict:
    """Vectorised :func:`sample_event`; returns a dict of length-``n`` arrays.

    Keys: ``left``, ``tail_up``, ``x0``, ``y0``, ``x``, ``y``, ``noise_c``,
    ``noise_t``, ``heard``, ``b``.
    """
    left = rng.random(n) < PROB_LEFT
    tail_up = rng.random(n) < PROB_TAIL_UP
    x0 = rng.normal(0.0, params.Delta, n)
    y0 = rng.normal(0.0, params.Delta, n)
    x = x0 + np.where(left, SHIFT, 0.0)
    y = y0 + np.where(left, 0.0, np.where(tail_up, SHIFT, -SHIFT))
    noise_c = rng.random(n) < noise_prob_cat(x, params)
    noise_t = rng.random(n) < noise_prob_tail(y, params)
    heard = np.where(left, noise_c, noise_t)
    b = heard | (rng.random(n) < params.p)
    return dict(left=left, tail_up=tail_up, x0=x0, y0=y0, x=x, y=y,
                noise_c=noise_c, noise_t=noise_t, heard=heard, b=b)


class Estimate(NamedTuple):
    """A point estimate with its standard error; ``value`` is None when unavailable."""

    value: Optional[float]
    std_error: Optional[float]
    count: int

    @property
    def available(self) -> bool:
        return self.value is not None


UNAVAILABLE = Estimate(None, None, 0)


@dataclass
class RunningMoments:
    """Count, mean and sum of squared deviations of one stream.

    Batches are reduced with a two-pass mean/deviation sum and folded in with
    the pairwise update of Chan, Golub and LeVeque.
    """

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, value: float):
        self.n += 1
        delta = value - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (value - self.mean)

    def push_batch(self, values: np.ndarray):
        k = values.size
        if k == 0:
            return
        mean = float(values.mean())
        dev = values - mean
        self.merge(RunningMoments(k, mean, float(np.dot(dev, dev))))

    def merge(self, other: "RunningMoments"):
        if other.n == 0:
            return
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            return
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean += delta * other.n / n
        self.m2 += other.m2 + delta * delta * self.n * other.n / n
        self.n = n

    def copy(self) -> "RunningMoments":
        return RunningMoments(self.n, self.mean, self.m2)

    def estimate(self) -> Estimate:
        if self.n == 0:
            return UNAVAILABLE
        if self.n == 1:
            return Estimate(self.mean, None, 1)
        return Estimate(self.mean, math.sqrt(self.m2 / (self.n - 1) / self.n), self.n)


@dataclass
class ClassMoments:
    """Moments of ``x``, ``y`` and ``x*y`` within one conditioning class."""

    x: RunningMoments = field(default_factory=RunningMoments)
    y: RunningMoments = field(default_factory=RunningMoments)
    xy: RunningMoments = field(default_factory=RunningMoments)

    def push_batch(self, x: np.ndarray, y: np.ndarray):
        self.x.push_batch(x)
        self.y.push_batch(y)
        self.xy.push_batch(x * y)

    def merge(self, other: "ClassMoments"):
        self.x.merge(other.x)
        self.y.merge(other.y)
        self.xy.merge(other.xy)

    def copy(self) -> "ClassMoments":
        return ClassMoments(self.x.copy(), self.y.copy(), self.xy.copy())


@dataclass
class PostSelectionAccumulator:
    success: ClassMoments = field(default_factory=ClassMoments)
    failure: ClassMoments = field(default_factory=ClassMoments)

    def push_batch(self, x: np.ndarray, y: np.ndarray, b: np.ndarray):
        self.success.push_batch(x[b], y[b])
        nb = ~b
        self.failure.push_batch(x[nb], y[nb])

    def merge(self, other: "PostSelectionAccumulator"):
        self.success.merge(other.success)
        self.failure.merge(other.failure)

    def result(self) -> "EstimateSet":
        n_b, n_not_b = self.success.x.n, self.failure.x.n
        total = n_b + n_not_b
        everything = self.success.copy()
        everything.merge(self.failure)
        if total:
            rate = n_b / total
            prob = Estimate(rate, math.sqrt(rate * (1.0 - rate) / total), total)
        else:
            prob = UNAVAILABLE
        cross_b = self.success.xy.estimate()
        cross_not_b = self.failure.xy.estimate()
        return EstimateSet(
            count_total=total,
            count_b=n_b,
            count_not_b=n_not_b,
            prob_b_hat=prob,
            mean_x_b=self.success.x.estimate(),
            mean_y_b=self.success.y.estimate(),
            crossmoment_b=cross_b,
            crossmoment_not_b=cross_not_b,
            signed_crossmoment=_signed(cross_b, cross_not_b),
            mean_x_all=everything.x.estimate(),
            mean_y_all=everything.y.estimate(),
            crossmoment_all=everything.xy.estimate(),
        )


@dataclass(frozen=True)
class EstimateSet:
    count_total: int
    count_b: int
    count_not_b: int
    prob_b_hat: Estimate
    mean_x_b: Estimate
    mean_y_b: Estimate
    crossmoment_b: Estimate
    crossmoment_not_b: Estimate
    signed_crossmoment: Estimate
    mean_x_all: Estimate
    mean_y_all: Estimate
    crossmoment_all: Estimate

    ESTIMATORS = ("prob_b_hat", "mean_x_b", "mean_y_b", "crossmoment_b", "crossmoment_not_b",
                  "signed_crossmoment", "mean_x_all", "mean_y_all", "crossmoment_all")

    def rows(self) -> list[tuple[str, Optional[float], Optional[float], int]]:
        """``(estimator, value, std_error, count)`` rows for flat tables."""
        return [(name, *getattr(self, name)) for name in self.ESTIMATORS]

    def to_dict(self) -> dict:
        doc = {"count_total": self.count_total, "count_b": self.count_b,
               "count_not_b": self.count_not_b}
        for name, value, se, count in self.rows():
            doc[name] = {"value": value, "std_error": se, "count": count}
        return doc


def _signed(plus: Estimate, minus: Estimate) -> Estimate:
    if not (plus.available and minus.available):
        return UNAVAILABLE
    if plus.std_error is None or minus.std_error is None:
        se = None
    else:
        se = math.hypot(plus.std_error, minus.std_error)
    return Estimate(plus.value - minus.value, se, plus.count + minus.count)


def signed_cross_moment(est: EstimateSet) -> Estimate:
    """``<xy>_+ - <xy>_-``; unavailable when either post-selection class is empty."""
    return _signed(est.crossmoment_b, est.crossmoment_not_b)


def _chunk_sizes(n_events: int, n_chunks: int) -> list[int]:
    base, extra = divmod(n_events, n_chunks)
    return [base + (1 if i < extra else 0) for i in range(n_chunks)]


def _run_chunk(params: ModelParams, seed: int, chunk: int, size: int) -> PostSelectionAccumulator:
    rng = chunk_generator(seed, chunk)
    acc = PostSelectionAccumulator()
    done = 0
    while done < size:
        m = min(BLOCK_SIZE, size - done)
        ev = sample_events(rng, params, m)
        acc.push_batch(ev["x"], ev["y"], ev["b"])
        done += m
    return acc


def run(params: ModelParams, config: SimConfig, n_jobs: int = 1) -> EstimateSet:
    """Sample ``config.n_events`` events and estimate all moments.

    ``n_jobs`` threads sample chunks concurrently; it never changes the result.
    """
    params = validate(params)
    config.check()
    sizes = _chunk_sizes(config.n_events, config.n_chunks)
    jobs = [(params, config.seed, i, s) for i, s in enumerate(sizes)]
    if n_jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda a: _run_chunk(*a), jobs))
    else:
        parts = [_run_chunk(*a) for a in jobs]
    total = PostSelectionAccumulator()
    for part in parts:
        total.merge(part)
    return total.result()


def estimate_moments(x: np.ndarray, y: np.ndarray, b: np.ndarray) -> EstimateSet:
    """Moment estimates from already-recorded readouts and post-selection flags."""
    acc = PostSelectionAccumulator()
    acc.push_batch(np.asarray(x, dtype=float), np.asarray(y, dtype=float), np.asarray(b, dtype=bool))
    return acc.result()


def resolution_warning(params: ModelParams, n_events: int) -> Optional[str]:
    """Message when too few events are requested to resolve the post-selected shift."""
    if n_events * params.p < 100.0 * params.Delta ** 2:
        return (f"n_events*p = {n_events * params.p:.3g} is below 100*Delta^2 = "
                f"{100.0 * params.Delta ** 2:.3g}; post-selected averages will be dominated by pointer noise")
    return None
