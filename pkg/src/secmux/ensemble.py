"""Random-coding ensemble bounds and the code-existence argument.

For the i.i.d. random multiplex codebook, the expected per-message error,
variational-distance secrecy, and leakage are bounded by closed expressions
in two spectrum tails: the main-channel density tail below the decoding
threshold a, and the wiretap-channel density tail above the resolvability
threshold b (called delta_n here).  This module evaluates those bounds
exactly from the convolution spectra, runs seeded ensembles of codebooks
whose per-trial figures come from the exact evaluator, and applies the
Markov-inequality selection showing some single codebook satisfies all
per-message constraints simultaneously.

It also houses the Monte Carlo tail estimator to fall back on when the
exact spectrum would exceed its atom cap.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import Dist, WiretapPair, Dmc, mutual_information
from .capacity import RateTuple
from .multiplex import generate_codebook
from .security import exact_error, exact_leakage, exact_vd
from .spectrum import iid_spectrum, tail_above, tail_below


def eta(x: float) -> float:
    """-x log2 x with the 0 and 1 endpoints sent to 0."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x)


@dataclass(frozen=True)
class BoundInputs:
    """Everything the ensemble bounds depend on.

    When produced by achievability_params, slack_eps and slack_leak record
    the multiplicative slack that integer rounding of the message sizes
    introduces over the ideal 2^(-n gamma / 2) decay of the error and
    leakage terms.
    """

    pair: WiretapPair
    p: Dist
    n: int
    sizes: tuple
    a: float
    b: float
    slack_eps: float | None = None
    slack_leak: float | None = None

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        if any(m < 1 for m in sizes):
            raise ValueError("message sizes must be >= 1")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("thresholds a and b must be finite")
        object.__setattr__(self, "sizes", sizes)

    @property
    def T(self) -> int:
        return len(self.sizes)

    @property
    def num_codewords(self) -> int:
        return int(np.prod(self.sizes))

    def dummy_size(self, t: int) -> int:
        """Codewords per fixed value of message t (0-based index here)."""
        return self.num_codewords // self.sizes[t]


@dataclass(frozen=True)
class EnsembleBounds:
    """Exact bound values on the ensemble means, one entry per message."""

    eps_bound: float
    d_bounds: tuple
    leak_bounds: tuple
    delta_n: float


def ensemble_bounds(bi: BoundInputs) -> EnsembleBounds:
    """Evaluate the three random-coding bounds from exact spectra.

    eps: P{density(main) < a} + (prod M_t) 2^(-a n), identical for all t.
    d:   2 (2 delta_n + sqrt(2^(b n) / L_t)) per message.
    leak (per symbol): eta(delta_n)/n + delta_n log2|Z| + 2^(b n)/L_t,
    with delta_n = P{density(wiretap) > b}.
    """
    main_spec = iid_spectrum(bi.p, bi.pair.main, bi.n)
    tap_spec = iid_spectrum(bi.p, bi.pair.wiretap, bi.n)
    delta_n = tail_above(tap_spec, bi.b)
    eps_bound = tail_below(main_spec, bi.a) + bi.num_codewords * 2.0 ** (-bi.a * bi.n)
    z_bits = math.log2(bi.pair.wiretap.out_size)
    d_bounds = []
    leak_bounds = []
    for t in range(bi.T):
        l_t = bi.dummy_size(t)
        ratio = 2.0 ** (bi.b * bi.n) / l_t
        d_bounds.append(2.0 * (2.0 * delta_n + math.sqrt(ratio)))
        leak_bounds.append(eta(delta_n) / bi.n + delta_n * z_bits + ratio)
    return EnsembleBounds(
        eps_bound=eps_bound,
        d_bounds=tuple(d_bounds),
        leak_bounds=tuple(leak_bounds),
        delta_n=delta_n,
    )


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Exact per-trial figures for a seeded ensemble, with bound comparisons.

    eps, vd, leak_rate have shape (trials, T).  stderr entries are None when
    only one trial was run; the bound comparison then uses the raw value.
    """

    bi: BoundInputs
    trials: int
    seeds: tuple
    eps: np.ndarray
    vd: np.ndarray
    leak_rate: np.ndarray
    bounds: EnsembleBounds

    @property
    def T(self) -> int:
        return self.bi.T

    def means(self) -> dict:
        return {
            "eps": self.eps.mean(axis=0),
            "vd": self.vd.mean(axis=0),
            "leak_rate": self.leak_rate.mean(axis=0),
        }

    def stderrs(self) -> dict:
        if self.trials < 2:
            return {"eps": None, "vd": None, "leak_rate": None}
        f = 1.0 / math.sqrt(self.trials)
        return {
            "eps": self.eps.std(axis=0, ddof=1) * f,
            "vd": self.vd.std(axis=0, ddof=1) * f,
            "leak_rate": self.leak_rate.std(axis=0, ddof=1) * f,
        }

    def bound_checks(self) -> dict:
        """mean <= bound + 3 stderr per quantity and message (flag, not throw)."""
        means = self.means()
        errs = self.stderrs()
        bound_vec = {
            "eps": np.full(self.T, self.bounds.eps_bound),
            "vd": np.asarray(self.bounds.d_bounds),
            "leak_rate": np.asarray(self.bounds.leak_bounds),
        }
        out = {}
        for key, mean in means.items():
            slack = 0.0 if errs[key] is None else 3.0 * errs[key]
            out[key] = mean <= bound_vec[key] + slack
        return out

    @property
    def all_within_bounds(self) -> bool:
        return all(bool(np.all(v)) for v in self.bound_checks().values())


def trial_seeds(master_seed: int, trials: int) -> tuple:
    """Deterministic per-trial codebook seeds derived from the master seed."""
    state = np.random.SeedSequence(master_seed).generate_state(trials, dtype=np.uint64)
    return tuple(int(s) for s in state)


def ensemble_experiment(
    bi: BoundInputs,
    trials: int,
    master_seed: int,
    threads: int = 1,
) -> EnsembleResult:
    """Exactly evaluate `trials` independently seeded codebooks against the bounds.

    Per-trial seeds derive from (master_seed, trial index), so the result is
    reproducible and independent of the thread cap; trials are aggregated by
    index, never by completion order.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    seeds = trial_seeds(master_seed, trials)
    t_range = range(1, bi.T + 1)

    def one_trial(seed: int):
        code = generate_codebook(bi.p, bi.n, bi.sizes, bi.a, seed)
        eps = [exact_error(code, bi.pair.main, bi.p, t) for t in t_range]
        vd = [exact_vd(code, bi.pair.wiretap, t) for t in t_range]
        leak = [exact_leakage(code, bi.pair.wiretap, t)[1] for t in t_range]
        return eps, vd, leak

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_trial, seeds))
    else:
        rows = [one_trial(s) for s in seeds]

    eps = np.array([r[0] for r in rows])
    vd = np.array([r[1] for r in rows])
    leak = np.array([r[2] for r in rows])
    return EnsembleResult(
        bi=bi, trials=trials, seeds=seeds,
        eps=eps, vd=vd, leak_rate=leak,
        bounds=ensemble_bounds(bi),
    )


def existence_check(er: EnsembleResult, T: int | None = None) -> bool:
    """Is there one trial whose codebook meets all 3T Markov-scaled constraints?

    A codebook qualifies when, for every message t, its eps, vd, and leakage
    are each at most 3T times the ensemble mean.  Markov's inequality makes
    each of the 3T constraints fail with probability below 1/(3T), so a
    positive fraction of codebooks qualifies and enough trials will find one.
    """
    if T is None:
        T = er.T
    means = er.means()
    cap_eps = 3.0 * T * means["eps"]
    cap_vd = 3.0 * T * means["vd"]
    cap_leak = 3.0 * T * means["leak_rate"]
    ok = (
        np.all(er.eps <= cap_eps[None, :], axis=1)
        & np.all(er.vd <= cap_vd[None, :], axis=1)
        & np.all(er.leak_rate <= cap_leak[None, :], axis=1)
    )
    return bool(ok.any())


def achievability_params(
    p: Dist,
    pair: WiretapPair,
    rt: RateTuple,
    gamma: float,
    n: int,
) -> BoundInputs:
    """Thresholds and message sizes that make both bound terms decay as 2^(-n gamma/2).

    Requires the rate tuple to clear both margins strictly: the total rate
    below I(p, main) - gamma, and every dummy rate above I(p, wiretap) +
    gamma.  Sets a = I(p, main) - gamma/2, b = I(p, wiretap) + gamma/2, and
    M_t = round(2^(n R_t)) (at least 1), recording the rounding slack on the
    guaranteed decay of the error and leakage terms.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    i_main = mutual_information(p, pair.main)
    i_tap = mutual_information(p, pair.wiretap)
    total = rt.total
    if not total < i_main - gamma:
        raise ValueError(
            f"total-rate margin violated: R_total = {total} must be strictly "
            f"below I(p, main) - gamma = {i_main - gamma}"
        )
    for t, r in enumerate(rt.rates):
        if not total - r > i_tap + gamma:
            raise ValueError(
                f"dummy-rate margin violated for message {t + 1}: R_total - R_t "
                f"= {total - r} must be strictly above I(p, wiretap) + gamma "
                f"= {i_tap + gamma}"
            )
    a = i_main - gamma / 2.0
    b = i_tap + gamma / 2.0
    sizes = tuple(max(1, round(2.0 ** (n * r))) for r in rt.rates)
    num = int(np.prod(sizes))
    # rounding slack: actual sizes over the ideal 2^(n R); with it factored
    # out, the error term obeys num 2^(-a n) <= slack_eps 2^(-n gamma/2) and
    # the leakage term 2^(b n)/L_t <= slack_leak 2^(-n gamma/2)
    slack_eps = num / 2.0 ** (n * total)
    slack_leak = max(
        2.0 ** (n * (total - r)) / (num // m) for r, m in zip(rt.rates, sizes)
    )
    return BoundInputs(
        pair=pair, p=p, n=n, sizes=sizes, a=a, b=b,
        slack_eps=slack_eps, slack_leak=slack_leak,
    )


def mc_tail_estimate(
    p: Dist,
    w: Dmc,
    n: int,
    threshold: float,
    side: str,
    trials: int,
    seed: int,
):
    """Monte Carlo estimate of a density tail when the exact spectrum is too big.

    side='below' estimates P{density < threshold}, side='above' the strict
    upper tail.  Returns (estimate, standard error).
    """
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")
    if trials < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    xs = rng.choice(len(p), size=(trials, n), p=p.probs)
    cum = np.cumsum(w.rows, axis=1)
    u = rng.random(size=(trials, n))
    ys = (u[:, :, None] > cum[xs]).sum(axis=2)
    out = p.probs @ w.rows
    dens = (np.log2(w.rows[xs, ys]) - np.log2(out[ys])).sum(axis=1) / n
    hit = dens < threshold if side == "below" else dens > threshold
    est = float(hit.mean())
    stderr = math.sqrt(est * (1.0 - est) / trials)
    return est, stderr
