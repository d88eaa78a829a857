"""Random multiplex codebooks and information-density threshold decoding.

A multiplex code carries T independent messages in one codeword: the tuple
(k_1, ..., k_T) selects a row of the codebook, so for each individual
message the other T-1 messages act as random dummy load.  Codewords are
drawn i.i.d. from the generation input distribution, which is exactly the
ensemble the error/secrecy bounds in secmux.ensemble average over.

The decoder accepts a received word for a codeword only when the
normalized information density exceeds the threshold (strictly), and
erases whenever zero or several codewords pass: acceptance regions are the
raw threshold sets minus their overlaps, so they are disjoint by
construction.  A maximum-likelihood decoder that never erases is provided
as the reference point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Dist, Dmc


@dataclass(frozen=True, eq=False)
class MultiplexCode:
    """A generated codebook: one codeword per message tuple, row-major order.

    Row-major means k_1 varies slowest: the tuple (k_1, ..., k_T), with
    each k_t in 1..M_t, maps to the row np.ravel_multi_index gives for the
    zero-based tuple under shape `sizes`.
    """

    n: int
    sizes: tuple
    codewords: np.ndarray
    threshold_a: float
    input_dist: Dist
    seed: int

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        if len(sizes) < 1 or any(m < 1 for m in sizes):
            raise ValueError("need T >= 1 message sizes, all >= 1")
        cw = np.asarray(self.codewords, dtype=np.intp)
        total = int(np.prod(sizes))
        if cw.shape != (total, self.n):
            raise ValueError(
                f"codeword array must be {total} x {self.n}, got {cw.shape}"
            )
        if np.any(cw < 0) or np.any(cw >= len(self.input_dist)):
            raise ValueError("codeword symbol out of range")
        cw.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "codewords", cw)

    @property
    def T(self) -> int:
        return len(self.sizes)

    @property
    def num_codewords(self) -> int:
        return int(np.prod(self.sizes))

    def dummy_size(self, t: int) -> int:
        """Number of codewords consistent with a fixed value of message t."""
        return self.num_codewords // self.sizes[t]

    def tuple_to_index(self, msg_tuple) -> int:
        msg = tuple(int(k) for k in msg_tuple)
        if len(msg) != self.T:
            raise ValueError(f"expected {self.T} message indices, got {len(msg)}")
        for t, (k, m) in enumerate(zip(msg, self.sizes)):
            if not 1 <= k <= m:
                raise IndexError(f"message {t + 1} index {k} outside 1..{m}")
        return int(np.ravel_multi_index(tuple(k - 1 for k in msg), self.sizes))

    def index_to_tuple(self, idx: int) -> tuple:
        return tuple(int(k) + 1 for k in np.unravel_index(idx, self.sizes))


@dataclass(frozen=True)
class DecodeOutcome:
    """Either a decoded message tuple (1-based indices) or an erasure."""

    tuple_result: tuple | None

    @property
    def is_erasure(self) -> bool:
        return self.tuple_result is None


ERASURE = DecodeOutcome(None)


def generate_codebook(p: Dist, n: int, sizes, threshold_a: float, seed: int) -> MultiplexCode:
    """Draw every codeword symbol i.i.d. from p with a seeded generator.

    The same (p, n, sizes, threshold_a, seed) always reproduces the same
    codebook bit for bit.  Colliding codewords are kept as drawn.
    """
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    sizes = tuple(int(m) for m in sizes)
    total = int(np.prod(sizes))
    rng = np.random.default_rng(seed)
    cw = rng.choice(len(p), size=(total, n), p=p.probs)
    return MultiplexCode(
        n=n, sizes=sizes, codewords=cw, threshold_a=float(threshold_a),
        input_dist=p, seed=int(seed),
    )


def encode(code: MultiplexCode, msg_tuple) -> np.ndarray:
    """Codeword for the message tuple (deterministic row-major lookup)."""
    return code.codewords[code.tuple_to_index(msg_tuple)]


def stochastic_encode(code: MultiplexCode, partial, seed: int) -> np.ndarray:
    """Encode message t = k_t with all other messages drawn uniformly.

    `partial` is a pair (t, k_t) with t in 1..T.  The marginal over the
    dummy draws is the uniform mixture of the codewords sharing k_t.
    """
    t, k = (int(v) for v in partial)
    if not 1 <= t <= code.T:
        raise IndexError(f"message position {t} outside 1..{code.T}")
    if not 1 <= k <= code.sizes[t - 1]:
        raise IndexError(f"message index {k} outside 1..{code.sizes[t - 1]}")
    rng = np.random.default_rng(seed)
    msg = [int(rng.integers(1, m + 1)) for m in code.sizes]
    msg[t - 1] = k
    return encode(code, msg)


def _density_ratios(code: MultiplexCode, w: Dmc, p: Dist, y_word) -> np.ndarray:
    """W^n(y|x) / P_{Y^n}(y) for every codeword x, with P_{Y^n} = (pW)^n."""
    y = np.asarray(y_word, dtype=np.intp)
    if y.ndim != 1 or y.size != code.n:
        raise ValueError(f"received word must have length {code.n}")
    if np.any(y < 0) or np.any(y >= w.out_size):
        raise ValueError("output symbol out of range")
    out = p.probs @ w.rows
    p_y = float(np.prod(out[y]))
    assert p_y > 0, "received word has zero probability under the generation ensemble"
    likes = np.prod(w.rows[code.codewords, y[None, :]], axis=1)
    return likes / p_y


def threshold_decode(code: MultiplexCode, w: Dmc, p: Dist, y_word) -> DecodeOutcome:
    """Decode by the acceptance regions {y : W^n(y|x)/P_{Y^n}(y) > 2^(a n)}.

    Returns the unique tuple whose region contains y_word; erases when no
    region or more than one region contains it (overlaps are cut away, so
    the effective regions are disjoint).  The inequality is strict.
    """
    ratios = _density_ratios(code, w, p, y_word)
    hits = np.nonzero(ratios > 2.0 ** (code.threshold_a * code.n))[0]
    if hits.size != 1:
        return ERASURE
    return DecodeOutcome(code.index_to_tuple(int(hits[0])))


def ml_decode(code: MultiplexCode, w: Dmc, y_word) -> DecodeOutcome:
    """Maximum-likelihood tuple decoder; ties go to the smallest row index."""
    y = np.asarray(y_word, dtype=np.intp)
    if y.ndim != 1 or y.size != code.n:
        raise ValueError(f"received word must have length {code.n}")
    if np.any(y < 0) or np.any(y >= w.out_size):
        raise ValueError("output symbol out of range")
    likes = np.prod(w.rows[code.codewords, y[None, :]], axis=1)
    return DecodeOutcome(code.index_to_tuple(int(np.argmax(likes))))


def decode_component(outcome: DecodeOutcome, t: int) -> int | None:
    """Message-t verdict of a tuple decode: the t-th coordinate, or None on erasure."""
    if outcome.is_erasure:
        return None
    return outcome.tuple_result[t - 1]


# ---------------------------------------------------------------------------
# codebook files
# ---------------------------------------------------------------------------
#
# Text format: five header lines (n, sizes, threshold_a, seed, input_dist)
# followed by one codeword per line as space-separated symbol indices.
# Floats are written with repr so the round-trip is lossless.

def save_codebook(code: MultiplexCode, path) -> None:
    with open(path, "w") as f:
        f.write(f"n={code.n}\n")
        f.write("sizes=" + " ".join(str(m) for m in code.sizes) + "\n")
        f.write(f"threshold_a={code.threshold_a!r}\n")
        f.write(f"seed={code.seed}\n")
        f.write("input_dist=" + " ".join(repr(float(v)) for v in code.input_dist.probs) + "\n")
        for row in code.codewords:
            f.write(" ".join(str(int(s)) for s in row) + "\n")


def load_codebook(path) -> MultiplexCode:
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    header = {}
    for ln in lines[:5]:
        key, _, val = ln.partition("=")
        header[key] = val
    n = int(header["n"])
    sizes = tuple(int(v) for v in header["sizes"].split())
    threshold_a = float(header["threshold_a"])
    seed = int(header["seed"])
    probs = np.array([float(v) for v in header["input_dist"].split()])
    cw = np.array(
        [[int(s) for s in ln.split()] for ln in lines[5:] if ln.strip()],
        dtype=np.intp,
    )
    return MultiplexCode(
        n=n, sizes=sizes, codewords=cw, threshold_a=threshold_a,
        input_dist=Dist(probs), seed=seed,
    )
