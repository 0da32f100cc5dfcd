"""Desk-scale private distributed SGD on synthetic convex problems.

Each round samples k of n clients without replacement; every sampled
client computes its per-sample gradient, clips it in l-infinity norm,
and randomizes it with the vector mechanism; a seeded permutation stands
in for the shuffler; the server averages the k reports and takes a
projected step on an l2 ball.  The attached privacy report is exactly
the accountant's output for the same (n, k, eps0, T, delta).

Aggregation uses exact per-coordinate fsum, so the shuffling permutation
provably cannot change the average (correct rounding is order-free) and
runs are reproducible bit-for-bit from the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .accountant import AccountantConfig, DpGuarantee, total_privacy
from .bounds import SubsampledShuffleParams
from .mechanisms import VecMech, clip_batch, vec_randomize_batch

LOSS_LEAST_SQUARES = "least_squares"
LOSS_LOGISTIC = "logistic"

SCHEDULE_PAPER = "paper"  # eta_t = D / (G sqrt(t))
SCHEDULE_CONSTANT = "constant"


@dataclass(frozen=True)
class ConvexProblem:
    """Synthetic ERM instance on an l2 ball.

    ``lipschitz`` bounds every per-sample gradient's l-infinity norm over
    the domain (the Lipschitz constant w.r.t. the l1 norm, dual of
    l-infinity); ``f_star`` is the optimum value of the averaged loss on
    the ball, computed offline by a deterministic full-gradient solver.
    """

    features: np.ndarray  # (n, d)
    targets: np.ndarray  # (n,)
    loss: str
    radius: float  # l2 domain radius; diameter D = 2 * radius
    lipschitz: float
    f_star: float
    theta_star: np.ndarray

    def __post_init__(self):
        if self.loss not in (LOSS_LEAST_SQUARES, LOSS_LOGISTIC):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.features.ndim != 2 or self.targets.shape != (self.features.shape[0],):
            raise ValueError("features must be (n, d) with matching targets")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def objective(self, theta: np.ndarray) -> float:
        a, b = self.features, self.targets
        if self.loss == LOSS_LEAST_SQUARES:
            resid = a @ theta - b
            return 0.5 * float(np.mean(resid**2))
        margins = -b * (a @ theta)
        return float(np.mean(np.logaddexp(0.0, margins)))

    def sample_grads(self, theta: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Per-sample gradients, one row per index."""
        a, b = self.features[idx], self.targets[idx]
        if self.loss == LOSS_LEAST_SQUARES:
            resid = a @ theta - b
            return resid[:, None] * a
        margins = -b * (a @ theta)
        sig = 1.0 / (1.0 + np.exp(-margins))
        return (-b * sig)[:, None] * a

    def full_gradient(self, theta: np.ndarray) -> np.ndarray:
        return self.sample_grads(theta, np.arange(self.n)).mean(axis=0)


def project(theta: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the l2 ball of the given radius."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    nrm = float(np.linalg.norm(theta))
    if nrm <= radius:
        return np.asarray(theta, dtype=np.float64)
    return np.asarray(theta, dtype=np.float64) * (radius / nrm)


def solve_optimum(
    features: np.ndarray,
    targets: np.ndarray,
    loss: str,
    radius: float,
    iters: int = 20_000,
    tol: float = 1e-14,
) -> tuple[np.ndarray, float]:
    """Deterministic projected full-gradient descent to the ball optimum."""
    n, d = features.shape
    if loss == LOSS_LEAST_SQUARES:
        smooth = float(np.linalg.eigvalsh(features.T @ features / n).max())
    else:
        smooth = float(np.linalg.eigvalsh(features.T @ features / n).max()) / 4.0
    step = 1.0 / max(smooth, 1e-12)
    theta = np.zeros(d)

    def grad(th):
        if loss == LOSS_LEAST_SQUARES:
            return features.T @ (features @ th - targets) / n
        margins = -targets * (features @ th)
        sig = 1.0 / (1.0 + np.exp(-margins))
        return features.T @ (-targets * sig) / n

    prev = math.inf
    for _ in range(iters):
        theta = project(theta - step * grad(theta), radius)
        cur = float(np.linalg.norm(grad(theta)))
        if abs(prev - cur) < tol and cur < 1e-10:
            break
        prev = cur
    prob_val_features = features
    if loss == LOSS_LEAST_SQUARES:
        f = 0.5 * float(np.mean((prob_val_features @ theta - targets) ** 2))
    else:
        f = float(np.mean(np.logaddexp(0.0, -targets * (prob_val_features @ theta))))
    return theta, f


def least_squares_problem(
    n: int, d: int, seed: int, radius: float = 1.0
) -> ConvexProblem:
    """A random well-conditioned least-squares instance on the l2 ball."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, d)) / math.sqrt(d)
    theta_true = rng.normal(size=d)
    theta_true *= 0.7 * radius / float(np.linalg.norm(theta_true))
    b = a @ theta_true + 0.05 * rng.normal(size=n)
    # ||grad_i||_inf <= |a_i . theta - b_i| ||a_i||_inf <= (||a_i||_2 R + |b_i|) ||a_i||_inf
    row_l2 = np.linalg.norm(a, axis=1)
    row_linf = np.max(np.abs(a), axis=1)
    lipschitz = float(np.max(row_linf * (row_l2 * radius + np.abs(b))))
    theta_star, f_star = solve_optimum(a, b, LOSS_LEAST_SQUARES, radius)
    return ConvexProblem(
        features=a,
        targets=b,
        loss=LOSS_LEAST_SQUARES,
        radius=radius,
        lipschitz=lipschitz,
        f_star=f_star,
        theta_star=theta_star,
    )


def logistic_problem(n: int, d: int, seed: int, radius: float = 1.0) -> ConvexProblem:
    """A random logistic-regression instance on the l2 ball."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, d)) / math.sqrt(d)
    theta_true = rng.normal(size=d)
    theta_true *= 0.7 * radius / float(np.linalg.norm(theta_true))
    b = np.where(a @ theta_true + 0.1 * rng.normal(size=n) >= 0, 1.0, -1.0)
    # ||grad_i||_inf <= ||a_i||_inf (the sigmoid weight is below 1).
    lipschitz = float(np.max(np.abs(a)))
    theta_star, f_star = solve_optimum(a, b, LOSS_LOGISTIC, radius)
    return ConvexProblem(
        features=a,
        targets=b,
        loss=LOSS_LOGISTIC,
        radius=radius,
        lipschitz=lipschitz,
        f_star=f_star,
        theta_star=theta_star,
    )


@dataclass(frozen=True)
class SgdConfig:
    """Run configuration: rounds, cohort, privacy, clipping, learning rate."""

    T: int
    k: int
    eps0: float
    clip_radius: float
    delta: float = 1e-8
    seed: int = 0
    schedule: str = SCHEDULE_PAPER
    eta: Optional[float] = None  # required by the constant schedule
    bypass_randomizer: bool = False  # eps0 -> infinity proxy; disables privacy
    record_every: Optional[int] = None  # default max(1, T // 500)

    def __post_init__(self):
        if self.T < 1 or self.T != int(self.T):
            raise ValueError(f"T must be a positive integer, got {self.T}")
        if self.k < 1 or self.k != int(self.k):
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not self.clip_radius > 0:
            raise ValueError("clip radius must be positive")
        if self.schedule not in (SCHEDULE_PAPER, SCHEDULE_CONSTANT):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.schedule == SCHEDULE_CONSTANT and not (
            self.eta is not None and self.eta > 0
        ):
            raise ValueError("constant schedule requires a positive eta")
        if not (self.bypass_randomizer or self.eps0 > 0):
            raise ValueError("eps0 must be positive unless the randomizer is bypassed")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass
class SgdRunReport:
    """Trajectory, suboptimality, and the attached privacy budget."""

    rounds: list[int]
    objectives: list[float]
    final_suboptimality: float
    privacy: Optional[DpGuarantee]
    grad_second_moment: float
    theta_final: np.ndarray = field(repr=False, default=None)


def second_moment_bound(problem: ConvexProblem, cfg: SgdConfig) -> float:
    """Closed-form ceiling on E||mean randomized gradient||_2^2.

    max(d^{1-2/p}, 1) L^2 + G_p^2(C)/k with p = infinity, so d L^2 plus the
    mechanism variance over the cohort size.
    """
    L = problem.lipschitz
    base = max(problem.d, 1) * L**2
    if cfg.bypass_randomizer:
        return base
    mech = VecMech(eps0=cfg.eps0, d=problem.d, C=cfg.clip_radius)
    return base + mech.variance_bound / cfg.k


def paper_schedule_constants(problem: ConvexProblem, cfg: SgdConfig) -> tuple[float, float]:
    """(D, G) for eta_t = D/(G sqrt(t)): domain diameter and gradient scale."""
    return problem.diameter, math.sqrt(second_moment_bound(problem, cfg))


def convergence_ceiling(problem: ConvexProblem, cfg: SgdConfig) -> float:
    """2 D G (2 + ln T)/sqrt(T) -- the schedule's suboptimality guarantee."""
    D, G = paper_schedule_constants(problem, cfg)
    return 2.0 * D * G * (2.0 + math.log(cfg.T)) / math.sqrt(cfg.T)


def _round_rng(seed: int, t: int, purpose: int) -> np.random.Generator:
    """Independent substream keyed by (seed, round, purpose)."""
    return np.random.default_rng(np.random.SeedSequence((seed, t, purpose)))


def _fsum_mean(rows: np.ndarray) -> np.ndarray:
    """Permutation-invariant mean: correctly rounded per-coordinate sums."""
    k = rows.shape[0]
    return np.array([math.fsum(rows[:, j]) for j in range(rows.shape[1])]) / k


def aggregate_round(
    problem: ConvexProblem,
    theta: np.ndarray,
    idx: np.ndarray,
    mech: Optional[VecMech],
    cfg: SgdConfig,
    t: int,
    shuffle: bool = True,
) -> np.ndarray:
    """One round's mean report: gradients, clipping, randomization, shuffle."""
    grads = problem.sample_grads(theta, idx)
    clipped = clip_batch(grads, cfg.clip_radius, "linf")
    if mech is None:
        reports = clipped
    else:
        reports = vec_randomize_batch(clipped, mech, _round_rng(cfg.seed, t, 1))
    if shuffle:
        perm = _round_rng(cfg.seed, t, 2).permutation(len(idx))
        reports = reports[perm]
    return _fsum_mean(reports)


def run(problem: ConvexProblem, cfg: SgdConfig) -> SgdRunReport:
    """Execute the private SGD loop and attach the accountant's guarantee."""
    if cfg.k > problem.n:
        raise ValueError(f"cohort k={cfg.k} exceeds n={problem.n}")
    mech = (
        None
        if cfg.bypass_randomizer
        else VecMech(eps0=cfg.eps0, d=problem.d, C=cfg.clip_radius)
    )
    if cfg.schedule == SCHEDULE_PAPER:
        D, G = paper_schedule_constants(problem, cfg)
        eta = lambda t: D / (G * math.sqrt(t))
    else:
        eta = lambda t: cfg.eta

    record_every = cfg.record_every or max(1, cfg.T // 500)
    theta = np.zeros(problem.d)
    rounds: list[int] = [0]
    objectives: list[float] = [problem.objective(theta)]
    sq_norm_sum = 0.0

    for t in range(1, cfg.T + 1):
        idx = _round_rng(cfg.seed, t, 0).choice(problem.n, size=cfg.k, replace=False)
        g_bar = aggregate_round(problem, theta, idx, mech, cfg, t)
        sq_norm_sum += float(g_bar @ g_bar)
        theta = project(theta - eta(t) * g_bar, problem.radius)
        if t % record_every == 0 or t == cfg.T:
            rounds.append(t)
            objectives.append(problem.objective(theta))

    privacy = None
    if mech is not None:
        params = SubsampledShuffleParams(n=problem.n, k=cfg.k, eps0=cfg.eps0)
        privacy = total_privacy(params, AccountantConfig(T=cfg.T, delta=cfg.delta))
    return SgdRunReport(
        rounds=rounds,
        objectives=objectives,
        final_suboptimality=objectives[-1] - problem.f_star,
        privacy=privacy,
        grad_second_moment=sq_norm_sum / cfg.T,
        theta_final=theta,
    )


def grad_second_moment_check(
    problem: ConvexProblem, cfg: SgdConfig, samples: int = 1000
) -> float:
    """Monte-Carlo estimate of E||mean randomized gradient||_2^2 at a random
    interior point; callers compare it against second_moment_bound."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples for a stable estimate")
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xE57)))
    theta = rng.normal(size=problem.d)
    theta = project(theta, 0.5 * problem.radius)
    mech = (
        None
        if cfg.bypass_randomizer
        else VecMech(eps0=cfg.eps0, d=problem.d, C=cfg.clip_radius)
    )
    total = 0.0
    for s in range(samples):
        idx = rng.choice(problem.n, size=cfg.k, replace=False)
        grads = problem.sample_grads(theta, idx)
        clipped = clip_batch(grads, cfg.clip_radius, "linf")
        reports = clipped if mech is None else vec_randomize_batch(clipped, mech, rng)
        g_bar = reports.mean(axis=0)
        total += float(g_bar @ g_bar)
    return total / samples
