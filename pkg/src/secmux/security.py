"""Exact per-message error, leakage, and distance measures at small blocklength.

Everything here enumerates the full output space (capped at 2^24 outcomes),
so the numbers are exact up to float rounding: per-message decoding error of
the threshold decoder, eavesdropper leakage both as a mutual information and
as the equivalent average divergence, and the average pairwise variational
distance between the eavesdropper's conditional output distributions.  The
two leakage routes are computed independently and must agree; that identity
is asserted on every call.

Output words are indexed mixed-radix with symbol 0 most significant, fixing
a canonical outcome order for CSV export and cross-checks.  All enumeration
loops accumulate in that fixed order, so results are identical from run to
run on the same platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    Dist,
    Dmc,
    WiretapPair,
    check_enumeration_budget,
    iid_output_vector,
    kl_divergence,
    l1_distance,
    word_output_vector,
)
from .multiplex import MultiplexCode

LEAKAGE_IDENTITY_TOL = 1e-9


def _codeword_output_matrix(code: MultiplexCode, v: Dmc) -> np.ndarray:
    """V^n(.|codeword) for every codeword, shape (num_codewords, out_size^n)."""
    check_enumeration_budget(v.out_size, code.n)
    return np.vstack([word_output_vector(v, cw) for cw in code.codewords])


def _component_values(code: MultiplexCode, t: int) -> np.ndarray:
    """1-based value of message t for every codebook row."""
    if not 1 <= t <= code.T:
        raise IndexError(f"message position {t} outside 1..{code.T}")
    total = code.num_codewords
    return np.unravel_index(np.arange(total), code.sizes)[t - 1] + 1


@dataclass(frozen=True, eq=False)
class ConditionalOutput:
    """Eavesdropper output distribution conditioned on each value of message t."""

    t: int
    per_k: np.ndarray  # shape (M_t, out_size^n)

    def __post_init__(self):
        per_k = np.asarray(self.per_k, dtype=np.float64)
        sums = per_k.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError("conditional output rows must each sum to 1")
        per_k.setflags(write=False)
        object.__setattr__(self, "per_k", per_k)

    @property
    def mixture(self) -> np.ndarray:
        return self.per_k.mean(axis=0)


def conditional_outputs(code: MultiplexCode, v: Dmc, t: int) -> ConditionalOutput:
    """Mixture over the dummy messages: per_k = mean of V^n(.|cw) over rows
    whose message t equals k."""
    outputs = _codeword_output_matrix(code, v)
    ks = _component_values(code, t)
    m_t = code.sizes[t - 1]
    per_k = np.vstack([outputs[ks == k].mean(axis=0) for k in range(1, m_t + 1)])
    # sanity: mixing the conditionals back must reproduce the grand mean
    assert np.max(np.abs(per_k.mean(axis=0) - outputs.mean(axis=0))) <= 1e-12
    return ConditionalOutput(t=t, per_k=per_k)


# ---------------------------------------------------------------------------
# decoding error
# ---------------------------------------------------------------------------

def _decode_table(code: MultiplexCode, w: Dmc, p: Dist):
    """Per-outcome decode of the threshold rule over the whole output space.

    Returns (likes, decoded): likes[j, y] = W^n(y|codeword j), decoded[y] =
    codebook row decoded at outcome y, or -1 for erasure.
    """
    likes = _codeword_output_matrix(code, w)
    p_y = iid_output_vector(p, w, code.n)
    member = likes > (2.0 ** (code.threshold_a * code.n)) * p_y[None, :]
    counts = member.sum(axis=0)
    decoded = np.where(counts == 1, member.argmax(axis=0), -1)
    return likes, decoded


def exact_error(code: MultiplexCode, w: Dmc, p: Dist, t: int) -> float:
    """Exact average error probability of message t under threshold decoding.

    Averages over the message value and the dummy messages; an erasure
    counts as an error.
    """
    likes, decoded = _decode_table(code, w, p)
    ks = _component_values(code, t)
    dec_k = np.zeros(decoded.size, dtype=np.intp)
    valid = decoded >= 0
    dec_k[valid] = ks[decoded[valid]]
    total = 0.0
    for j in range(code.num_codewords):
        wrong = dec_k != ks[j]
        total += float(likes[j] @ wrong)
    return total / code.num_codewords


def erasure_fraction(code: MultiplexCode, w: Dmc, p: Dist) -> float:
    """Probability that the threshold decoder erases, averaged over tuples."""
    likes, decoded = _decode_table(code, w, p)
    erased = decoded < 0
    return float(np.mean(likes @ erased))


# ---------------------------------------------------------------------------
# leakage and distance measures
# ---------------------------------------------------------------------------

def exact_leakage(code: MultiplexCode, v: Dmc, t: int):
    """I(K_t; Z^n) in total bits and per symbol, by two independent routes.

    Route one treats (K_t, Z^n) as a joint pair: H(Z^n) minus the average
    conditional entropy.  Route two averages D(per_k || mixture) over k.
    The routes must agree within 1e-9; their agreement is asserted.
    """
    cond = conditional_outputs(code, v, t)
    per_k = cond.per_k
    mix = cond.mixture

    def h(vec):
        nz = vec[vec > 0]
        return float(-np.dot(nz, np.log2(nz)))

    via_mi = h(mix) - float(np.mean([h(row) for row in per_k]))
    via_div = float(np.mean([kl_divergence(row, mix) for row in per_k]))
    assert abs(via_mi - via_div) <= LEAKAGE_IDENTITY_TOL, (via_mi, via_div)
    leak_total = max(via_mi, 0.0)
    return leak_total, leak_total / code.n


def exact_vd(code: MultiplexCode, v: Dmc, t: int) -> float:
    """Average pairwise variational distance among the conditional outputs."""
    per_k = conditional_outputs(code, v, t).per_k
    m = per_k.shape[0]
    if m == 1:
        return 0.0
    total = 0.0
    for k in range(m):
        for kk in range(m):
            if kk != k:
                total += l1_distance(per_k[kk], per_k[k])
    return total / (m * (m - 1))


def mixture_distance_bound(code: MultiplexCode, v: Dmc, t: int):
    """Distance of each conditional to the mixture vs. its average distance
    to the other conditionals.

    Returns (lhs, rhs) arrays over k: lhs[k] = ||mixture - per_k||_1 and
    rhs[k] = mean over k' != k of ||per_k' - per_k||_1.  The mixture is the
    uniform average, so lhs <= rhs always; that is asserted.
    """
    per_k = conditional_outputs(code, v, t).per_k
    m = per_k.shape[0]
    if m == 1:
        raise ValueError("mixture distance bound is vacuous for a single message value")
    mix = per_k.mean(axis=0)
    lhs = np.array([l1_distance(mix, per_k[k]) for k in range(m)])
    rhs = np.array([
        np.mean([l1_distance(per_k[kk], per_k[k]) for kk in range(m) if kk != k])
        for k in range(m)
    ])
    assert np.all(lhs <= rhs + 1e-12)
    return lhs, rhs


def pinsker_check(d_kl: float, d_l1: float) -> bool:
    """True iff the divergence (bits) dominates the squared L1 distance / (2 ln 2)."""
    if d_kl < 0:
        raise ValueError("divergence must be nonnegative")
    if not 0.0 <= d_l1 <= 2.0:
        raise ValueError("variational distance must lie in [0, 2]")
    return d_kl >= d_l1 ** 2 / (2.0 * math.log(2.0)) - 1e-12


def verdu_han_lower_bound(code: MultiplexCode, w: Dmc, gamma: float) -> float:
    """Converse-side lower bound on the total decoding error of any decoder.

    With X^n uniform over the codebook and P_{Y^n} the codebook-induced
    output, returns
    Pr{(1/n) log2 W^n(Y|X)/P_{Y^n}(Y) <= (1/n) log2 (prod M_t) - gamma} - e^(-n gamma).
    The sum of the per-message error probabilities can never fall below it.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    likes = _codeword_output_matrix(code, w)
    mix = likes.mean(axis=0)
    total_rate = math.log2(code.num_codewords) / code.n
    cutoff = 2.0 ** (code.n * (total_rate - gamma))
    # likes/mix <= cutoff, rearranged to avoid 0/0 at zero-probability outcomes
    event = likes <= cutoff * mix[None, :]
    prob = float(np.mean(np.sum(likes * event, axis=1)))
    return prob - math.exp(-code.n * gamma)


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MessageSecurity:
    """Exact security figures for one message slot."""

    t: int
    m_t: int
    l_t: int
    eps: float
    leak_total: float
    leak_rate: float
    vd: float
    erasure_frac: float

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0 + 1e-12:
            raise ValueError(f"error probability {self.eps} outside [0, 1]")
        if self.leak_total < 0 or self.vd < 0 or self.vd > 2.0 + 1e-12:
            raise ValueError("leakage or distance out of range")


@dataclass(frozen=True)
class SecurityReport:
    """Per-message exact evaluation of one codebook on one wiretap pair."""

    n: int
    per_message: tuple


def security_report(code: MultiplexCode, pair: WiretapPair, p: Dist) -> SecurityReport:
    """Evaluate every message slot of the codebook exactly."""
    erasure = erasure_fraction(code, pair.main, p)
    records = []
    for t in range(1, code.T + 1):
        leak_total, leak_rate = exact_leakage(code, pair.wiretap, t)
        records.append(
            MessageSecurity(
                t=t,
                m_t=code.sizes[t - 1],
                l_t=code.dummy_size(t - 1),
                eps=exact_error(code, pair.main, p, t),
                leak_total=leak_total,
                leak_rate=leak_rate,
                vd=exact_vd(code, pair.wiretap, t),
                erasure_frac=erasure,
            )
        )
    return SecurityReport(n=code.n, per_message=tuple(records))


def report_to_csv(report: SecurityReport, path, provenance: dict | None = None) -> None:
    with open(path, "w") as f:
        if provenance:
            f.write("# " + " ".join(f"{k}={v}" for k, v in sorted(provenance.items())) + "\n")
        f.write("t,M_t,L_t,eps,leak_total_bits,leak_rate,vd,erasure_frac\n")
        for r in report.per_message:
            f.write(
                f"{r.t},{r.m_t},{r.l_t},{r.eps!r},{r.leak_total!r},"
                f"{r.leak_rate!r},{r.vd!r},{r.erasure_frac!r}\n"
            )


# ---------------------------------------------------------------------------
# joint and conditional leakage (no single-message interpretation)
# ---------------------------------------------------------------------------

def joint_leakage(code: MultiplexCode, v: Dmc) -> float:
    """I(K_1, ..., K_T; Z^n) in bits: leakage about the whole tuple."""
    outputs = _codeword_output_matrix(code, v)
    mix = outputs.mean(axis=0)

    def h(vec):
        nz = vec[vec > 0]
        return float(-np.dot(nz, np.log2(nz)))

    return max(h(mix) - float(np.mean([h(row) for row in outputs])), 0.0)


def conditional_leakage(code: MultiplexCode, v: Dmc, t: int, given: int) -> float:
    """I(K_t; Z^n | K_given) in bits, averaged over the conditioning value."""
    if t == given:
        raise ValueError("conditioning message must differ from the target")
    outputs = _codeword_output_matrix(code, v)
    ks_t = _component_values(code, t)
    ks_g = _component_values(code, given)

    def h(vec):
        nz = vec[vec > 0]
        return float(-np.dot(nz, np.log2(nz)))

    total = 0.0
    m_g = code.sizes[given - 1]
    for g in range(1, m_g + 1):
        sel = ks_g == g
        sub = outputs[sel]
        sub_mix = sub.mean(axis=0)
        ks_sub = ks_t[sel]
        m_t = code.sizes[t - 1]
        per_k = np.vstack([sub[ks_sub == k].mean(axis=0) for k in range(1, m_t + 1)])
        total += h(sub_mix) - float(np.mean([h(row) for row in per_k]))
    return max(total / m_g, 0.0)
