"""Limited-memory BFGS minimizer.

Generic over any callable returning (value, gradient) for a flat variable
vector.  Search directions come from the two-loop recursion with the
gamma-scaled identity as the seed matrix (plain identity while the history
is empty); steps satisfy the weak Wolfe conditions with c1=1e-4, c2=0.9.
Convergence is declared on the infinity norm of the gradient.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels


@dataclass
class LbfgsConfig:
    m: int = 20
    c1: float = 1e-4
    c2: float = 0.9
    grad_tol: float = 1e-8
    max_iterations: int = 100_000
    max_linesearch_steps: int = 40

    def __post_init__(self):
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise ValueError("require 0 < c1 < c2 < 1")
        if self.m < 1:
            raise ValueError("history size must be >= 1")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")


class LbfgsHistory:
    """Ring buffer of (s, y, rho) pairs; pairs violating y.s > 0 are skipped."""

    def __init__(self, capacity: int, dim: int):
        self.capacity = capacity
        self.dim = dim
        self._S = np.zeros((capacity, dim))
        self._Y = np.zeros((capacity, dim))
        self._rho = np.zeros(capacity)
        self.count = 0
        self._head = 0  # next write slot
        self.gamma = 1.0

    def clear(self):
        self.count = 0
        self._head = 0
        self.gamma = 1.0

    def push(self, s, y) -> bool:
        ys = float(np.dot(y, s))
        if ys <= 1e-14 * float(np.linalg.norm(y)) * float(np.linalg.norm(s)):
            return False
        self._S[self._head] = s
        self._Y[self._head] = y
        self._rho[self._head] = 1.0 / ys
        self._head = (self._head + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)
        self.gamma = ys / float(np.dot(y, y))
        return True

    def ordered(self):
        """(S, Y, rho) views ordered oldest to newest."""
        if self.count < self.capacity:
            idx = np.arange(self.count)
        else:
            idx = (np.arange(self.capacity) + self._head) % self.capacity
        return self._S[idx], self._Y[idx], self._rho[idx]

    @property
    def pairs(self):
        S, Y, rho = self.ordered()
        return list(zip(S, Y, rho))


def two_loop_direction(history: LbfgsHistory, grad: np.ndarray) -> np.ndarray:
    """H_k . grad via the two-loop recursion (identity seed when empty)."""
    grad = np.asarray(grad, dtype=np.float64)
    if history is None or history.count == 0:
        return grad.copy()
    S, Y, rho = history.ordered()
    return kernels.two_loop(grad.copy(), S, Y, rho, history.gamma)


@dataclass
class LineSearchResult:
    alpha: float
    x: np.ndarray
    f: float
    g: np.ndarray
    ok: bool
    n_evals: int
    t_accept_eval: float = 0.0  # seconds spent evaluating the returned point


def wolfe_line_search(fun, x, p, f0, g0, config: LbfgsConfig) -> LineSearchResult:
    """Bracketing search for the weak Wolfe conditions.

    The first trial is alpha = 1.  A rejected trial shrinks or grows the
    bracket; the next candidate is a safeguarded secant step on the
    directional derivative (bisection fallback), doubling while no upper
    bound exists.  On exhausting max_linesearch_steps the best point seen is
    returned with ok=False.
    """
    dg0 = float(np.dot(g0, p))
    if dg0 >= 0.0:
        raise ValueError("line search requires a descent direction")
    lo, dg_lo = 0.0, dg0
    hi, dg_hi = np.inf, np.nan
    alpha = 1.0
    best = None
    n_evals = 0
    for _ in range(config.max_linesearch_steps):
        xn = x + alpha * p
        t0 = time.perf_counter()
        fn, gn = fun(xn)
        t_eval = time.perf_counter() - t0
        n_evals += 1
        dgn = float(np.dot(gn, p)) if np.isfinite(fn) else np.nan
        if np.isfinite(fn) and (best is None or fn < best.f):
            best = LineSearchResult(alpha, xn, fn, gn, False, n_evals, t_eval)
        if (not np.isfinite(fn)) or fn > f0 + config.c1 * alpha * dg0:
            hi, dg_hi = alpha, dgn
        elif dgn < config.c2 * dg0:
            lo, dg_lo = alpha, dgn
        else:
            return LineSearchResult(alpha, xn, fn, gn, True, n_evals, t_eval)
        if np.isinf(hi):
            alpha = 2.0 * alpha
            continue
        # secant zero of the directional derivative inside the bracket
        width = hi - lo
        denom = dg_hi - dg_lo
        alpha = lo - dg_lo * width / denom if np.isfinite(denom) and denom > 0 \
            else 0.5 * (lo + hi)
        alpha = min(max(alpha, lo + 0.1 * width), hi - 0.1 * width)
    if best is None:
        best = LineSearchResult(0.0, x, f0, g0, False, n_evals)
    best.n_evals = n_evals
    return best


@dataclass
class IterationRecord:
    iteration: int
    f: float
    grad_inf: float
    alpha: float
    t_direction: float
    t_linesearch: float
    t_iteration: float


@dataclass
class MinimizeResult:
    x: np.ndarray
    f: float
    g: np.ndarray
    status: str  # converged | max_iterations | line_search_failed | invalid
    iterations: int
    trace: list = field(default_factory=list)


def minimize(fun, x0, config: LbfgsConfig = None, callback=None) -> MinimizeResult:
    """L-BFGS main loop.

    `fun(x)` returns (value, gradient).  `callback(record, x)` is invoked
    after every accepted iteration (excluded from the iteration timings).

    Phase accounting: evaluating f and the gradient at the accepted point is
    what produces the gradient the next direction computation consumes, so
    that one evaluation is booked under t_direction.  t_linesearch covers the
    step-control logic plus any rejected trial evaluations.
    """
    cfg = config if config is not None else LbfgsConfig()
    x = np.array(x0, dtype=np.float64, copy=True)
    try:
        f, g = fun(x)
    except FloatingPointError:
        return MinimizeResult(x, np.nan, np.full_like(x, np.nan), "invalid", 0)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        return MinimizeResult(x, f, g, "invalid", 0)

    hist = LbfgsHistory(cfg.m, x.size)
    trace = []
    status = "max_iterations"
    it = 0
    while it < cfg.max_iterations:
        if float(np.max(np.abs(g))) < cfg.grad_tol:
            status = "converged"
            break
        t_start = time.perf_counter()
        z = two_loop_direction(hist, g)
        p = -z
        if float(np.dot(g, p)) >= 0.0:
            hist.clear()
            p = -g
        t_dir = time.perf_counter() - t_start

        t_ls0 = time.perf_counter()
        try:
            ls = wolfe_line_search(fun, x, p, f, g, cfg)
            if not ls.ok and hist.count > 0:
                # solver-level stall: retry once from steepest descent
                hist.clear()
                p = -g
                ls = wolfe_line_search(fun, x, p, f, g, cfg)
        except FloatingPointError:
            status = "invalid"
            break
        t_ls = time.perf_counter() - t_ls0
        t_dir += ls.t_accept_eval
        t_ls = max(t_ls - ls.t_accept_eval, 0.0)

        if not ls.ok:
            if ls.f < f:
                x, f, g = ls.x, ls.f, ls.g
            status = "line_search_failed"
            break

        s = ls.x - x
        y = ls.g - g
        x, f, g = ls.x, ls.f, ls.g
        hist.push(s, y)
        t_total = time.perf_counter() - t_start

        rec = IterationRecord(
            it, f, float(np.max(np.abs(g))), ls.alpha, t_dir, t_ls, t_total
        )
        trace.append(rec)
        if callback is not None:
            callback(rec, x)
        it += 1
    else:
        status = "max_iterations"

    if status == "max_iterations" and float(np.max(np.abs(g))) < cfg.grad_tol:
        status = "converged"
    return MinimizeResult(x, f, g, status, it, trace)
