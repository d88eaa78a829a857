"""Capacity, secrecy capacity, and multiplex rate-region membership.

The plain channel capacity is computed by the classical alternating
maximization over input distributions, which yields a rigorous
upper/lower bracket at every iteration.  The secrecy capacity is the
maximum of I(X~;Y) - I(X~;Z) over auxiliary inputs X~ and test channels
X~ -> X; that problem is nonconvex, so the solver is a best-effort
multistart search and says so: results carry certified_global=False
unless the wiretap channel is detected to be a degradation of the main
channel, in which case the auxiliary variable provably cannot help and
the no-auxiliary maximization is globally optimal.

Rate-region membership checks a *certificate* (an input distribution,
plus a test channel in stochastic mode) against the defining
inequalities; it does not search for one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, nnls

from .channels import Dist, Dmc, WiretapPair, cascade, mutual_information

REGION_TOL = 1e-9
DEGRADED_RESIDUAL_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """The capacity iteration did not close its bracket in time."""

    def __init__(self, lower: float, upper: float, iterations: int):
        self.bracket = (lower, upper)
        super().__init__(
            f"capacity bracket [{lower!r}, {upper!r}] after {iterations} iterations"
        )


@dataclass(frozen=True)
class RateTuple:
    """Per-message rates (R_1, ..., R_T) in bits per channel use."""

    rates: tuple

    def __post_init__(self):
        r = tuple(float(x) for x in self.rates)
        if len(r) < 1:
            raise ValueError("need at least one rate")
        if any(x < 0 for x in r):
            raise ValueError("rates must be nonnegative")
        object.__setattr__(self, "rates", r)

    @property
    def total(self) -> float:
        return float(sum(self.rates))

    def __len__(self) -> int:
        return len(self.rates)


@dataclass(frozen=True)
class RegionSpec:
    """Which multiplex region to test: T messages, deterministic or stochastic."""

    pair: WiretapPair
    T: int
    mode: str = "deterministic"

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.mode not in ("deterministic", "stochastic"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class SecrecySolution:
    """Best secrecy rate found, with the certificate that attains it."""

    value: float
    input_dist: Dist
    test_channel: Dmc | None
    restarts_used: int
    certified_global: bool

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("secrecy value must be nonnegative")
        if self.test_channel is not None and self.certified_global:
            raise ValueError("solutions using an auxiliary channel are never certified")


# ---------------------------------------------------------------------------
# channel capacity
# ---------------------------------------------------------------------------

def channel_capacity(w: Dmc, tol: float = 1e-9, max_iter: int = 10 ** 5):
    """Capacity of w in bits per use, with the achieving input distribution.

    Alternating maximization with the standard bracket: at input q, the
    per-row divergences d_x = D(w[x] || qW) give I(q,W) = sum q_x d_x as a
    lower bound and max_x d_x as an upper bound on C.  Iterates until the
    bracket gap is <= tol; the returned capacity is the lower bound, so the
    returned input attains it exactly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows = w.rows
    positive = rows > 0
    logrows = np.where(positive, np.log2(np.where(positive, rows, 1.0)), 0.0)
    q = np.full(w.in_size, 1.0 / w.in_size)
    lower = upper = 0.0
    for _ in range(max_iter):
        out = q @ rows
        with np.errstate(divide="ignore"):
            logout = np.where(out > 0, np.log2(np.where(out > 0, out, 1.0)), 0.0)
        d = np.sum(np.where(positive, rows * (logrows - logout[None, :]), 0.0), axis=1)
        lower = float(q @ d)
        upper = float(d.max())
        if upper - lower <= tol:
            return max(lower, 0.0), Dist(q / q.sum())
        q = q * np.exp2(d - d.max())
        q /= q.sum()
    raise ConvergenceError(lower, upper, max_iter)


def secrecy_gap(p: Dist, pair: WiretapPair) -> float:
    """I(p, main) - I(p, wiretap); negative when the wiretap channel is better."""
    return mutual_information(p, pair.main) - mutual_information(p, pair.wiretap)


# ---------------------------------------------------------------------------
# degradedness certificate
# ---------------------------------------------------------------------------

def degrading_channel(pair: WiretapPair):
    """Stochastic D with wiretap = main . D, or None if none fits to tolerance.

    Solves the nonnegative least-squares system stacking wiretap = main @ D
    with the row-sum-one equations, then accepts D only if the reproduction
    residual and the row sums are within DEGRADED_RESIDUAL_TOL.
    """
    w = pair.main.rows
    v = pair.wiretap.rows
    ny, nz = w.shape[1], v.shape[1]
    a = np.vstack([np.kron(w, np.eye(nz)), np.kron(np.eye(ny), np.ones((1, nz)))])
    b = np.concatenate([v.ravel(), np.ones(ny)])
    sol, _ = nnls(a, b)
    d = sol.reshape(ny, nz)
    if np.max(np.abs(w @ d - v)) > DEGRADED_RESIDUAL_TOL:
        return None
    if np.max(np.abs(d.sum(axis=1) - 1.0)) > DEGRADED_RESIDUAL_TOL:
        return None
    rows = np.clip(d, 0.0, None)
    return Dmc(rows / rows.sum(axis=1, keepdims=True))


def is_degraded(pair: WiretapPair) -> bool:
    return degrading_channel(pair) is not None


# ---------------------------------------------------------------------------
# secrecy capacity search
# ---------------------------------------------------------------------------

def _mi_raw(p: np.ndarray, rows: np.ndarray) -> float:
    out = p @ rows
    nz = out > 0
    h_y = -float(np.dot(out[nz], np.log2(out[nz])))
    pos = rows > 0
    row_h = -np.sum(np.where(pos, rows * np.log2(np.where(pos, rows, 1.0)), 0.0), axis=1)
    return h_y - float(np.dot(p, row_h))


def _gap_raw(p: np.ndarray, wrows: np.ndarray, vrows: np.ndarray) -> float:
    return _mi_raw(p, wrows) - _mi_raw(p, vrows)


def _softmax(theta: np.ndarray) -> np.ndarray:
    e = np.exp(theta - theta.max())
    return e / e.sum()


def simplex_grid(k: int, steps: int):
    """All probability vectors over k symbols with entries multiple of 1/steps."""
    for cuts in itertools.combinations(range(steps + k - 1), k - 1):
        parts = []
        prev = -1
        for c in cuts:
            parts.append(c - prev - 1)
            prev = c
        parts.append(steps + k - 2 - prev)
        yield np.array(parts, dtype=np.float64) / steps


def _grid_steps(k: int) -> int:
    # keep the sweep around 10^5 points for larger alphabets
    if k <= 3:
        return 64
    if k == 4:
        return 32
    if k == 5:
        return 12
    return 6


def _polish_input(p0: np.ndarray, objective, tol: float) -> tuple[np.ndarray, float]:
    """Gradient-free refinement of an input distribution via softmax coordinates."""
    theta0 = np.log(np.maximum(p0, 1e-12))

    def neg(theta):
        return -objective(_softmax(theta))

    res = minimize(
        neg,
        theta0,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": max(tol * 1e-3, 1e-14), "maxfev": 20000},
    )
    p = _softmax(res.x)
    return p, objective(p)


def secrecy_capacity(
    pair: WiretapPair,
    restarts: int = 16,
    tol: float = 1e-9,
    seed: int = 0,
) -> SecrecySolution:
    """Best-effort maximization of I(X~;Y) - I(X~;Z) over (input, test channel).

    One start is the no-auxiliary problem (test channel = identity): a
    simplex-grid sweep of the secrecy gap, plus the capacity-achieving input
    of the main channel, refined by gradient-free local search.  The
    remaining `restarts` starts draw a random input over an alphabet of size
    |X|+1 and a random test channel, refined the same way.  The returned
    solution is the best found; it is certified globally optimal only when
    the pair is detected degraded, where the auxiliary variable cannot help.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    nx = pair.in_size
    wrows = pair.main.rows
    vrows = pair.wiretap.rows

    def gap_obj(p):
        return _gap_raw(p, wrows, vrows)

    # --- no-auxiliary start -------------------------------------------------
    best_p = np.full(nx, 1.0 / nx)
    best_gap = gap_obj(best_p)
    for q in simplex_grid(nx, _grid_steps(nx)):
        g = _gap_raw(q, wrows, vrows)
        if g > best_gap:
            best_gap, best_p = g, q
    _, cap_input = channel_capacity(pair.main, tol=max(tol, 1e-9))
    g = gap_obj(cap_input.probs)
    if g > best_gap:
        best_gap, best_p = g, cap_input.probs
    polished_p, polished_gap = _polish_input(best_p, gap_obj, tol)
    if polished_gap > best_gap:
        best_gap, best_p = polished_gap, polished_p

    # --- auxiliary-variable restarts -----------------------------------------
    na = nx + 1
    rng = np.random.default_rng(seed)

    def aux_objective(theta):
        pt = _softmax(theta[:na])
        u = np.vstack([_softmax(theta[na + i * nx : na + (i + 1) * nx]) for i in range(na)])
        return _gap_raw(pt, u @ wrows, u @ vrows)

    best_aux_val = -np.inf
    best_aux_theta = None
    for _ in range(restarts):
        theta0 = rng.normal(scale=1.0, size=na + na * nx)
        res = minimize(
            lambda th: -aux_objective(th),
            theta0,
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": max(tol * 1e-3, 1e-14), "maxfev": 40000},
        )
        val = -res.fun
        if val > best_aux_val:
            best_aux_val = val
            best_aux_theta = res.x

    degraded = is_degraded(pair)

    if best_aux_val > best_gap + 1e-9:
        theta = best_aux_theta
        pt = _softmax(theta[:na])
        u = np.vstack([_softmax(theta[na + i * nx : na + (i + 1) * nx]) for i in range(na)])
        return SecrecySolution(
            value=max(best_aux_val, 0.0),
            input_dist=Dist(pt / pt.sum()),
            test_channel=Dmc(u / u.sum(axis=1, keepdims=True)),
            restarts_used=restarts,
            certified_global=False,
        )

    return SecrecySolution(
        value=max(best_gap, 0.0),
        input_dist=Dist(best_p / best_p.sum()),
        test_channel=None,
        restarts_used=restarts,
        certified_global=degraded,
    )


# ---------------------------------------------------------------------------
# region membership and multiplex order
# ---------------------------------------------------------------------------

def region_membership(
    rt: RateTuple,
    spec: RegionSpec,
    p: Dist,
    u: Dmc | None = None,
) -> bool:
    """Does the certificate (p, and u in stochastic mode) put rt in the region?

    Deterministic mode requires R_total <= I(p, W) and, for every message t,
    R_total - R_t >= I(p, V).  Stochastic mode applies the same inequalities
    to the cascades u.W and u.V.  Comparisons carry a +-1e-9 tolerance.
    """
    if len(rt) != spec.T:
        raise ValueError(f"rate tuple has {len(rt)} entries, region expects {spec.T}")
    if spec.mode == "stochastic":
        if u is None:
            raise ValueError("stochastic mode requires a test-channel certificate")
        w = cascade(u, spec.pair.main)
        v = cascade(u, spec.pair.wiretap)
    else:
        w, v = spec.pair.main, spec.pair.wiretap
    i_main = mutual_information(p, w)
    i_tap = mutual_information(p, v)
    total = rt.total
    if total > i_main + REGION_TOL:
        return False
    return all(total - r >= i_tap - REGION_TOL for r in rt.rates)


def minimal_t(p: Dist, pair: WiretapPair) -> int:
    """Smallest equal-rate multiplex order whose per-message dummy load covers
    the wiretap channel's mutual information at this input."""
    gap = secrecy_gap(p, pair)
    if gap <= 0:
        raise ValueError("no positive secrecy rate at this input")
    i_main = mutual_information(p, pair.main)
    return max(1, math.ceil(i_main / gap - 1e-9))


def equal_rate_capacity_tuple(pair: WiretapPair, tol: float = 1e-9):
    """Equal-rate tuple carrying the full main-channel capacity, and its T.

    Splits the capacity C over T = minimal_t messages at the
    capacity-achieving input; the result is always a member of the
    deterministic region.
    """
    c, p_star = channel_capacity(pair.main, tol=tol)
    t = minimal_t(p_star, pair)
    rt = RateTuple((c / t,) * t)
    spec = RegionSpec(pair, T=t, mode="deterministic")
    assert region_membership(rt, spec, p_star)
    return rt, t
