"""Finite alphabets, distributions, and discrete memoryless channels.

Everything downstream (spectra, codes, security evaluation) is built on the
two value types defined here: a probability vector over a finite alphabet
(`Dist`) and a row-stochastic transition matrix (`Dmc`).  All types are
immutable after construction and every operation is pure, so values can be
shared freely across threads.

Conventions: all logarithms are base 2 and all rates are in bits per channel
use.  0*log(0) is 0, and p*log(p/0) for p > 0 is +inf.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PROB_TOL = 1e-12
RANK_TOL = 1e-10

# Exact enumeration of n-fold outcome spaces is refused beyond this size.
ENUMERATION_BUDGET = 2 ** 24


class EnumerationBudgetError(ValueError):
    """An n-fold outcome space is too large to enumerate exactly."""

    def __init__(self, required: int, budget: int = ENUMERATION_BUDGET):
        self.required = required
        self.budget = budget
        super().__init__(
            f"exact enumeration needs {required} outcomes, budget is {budget}"
        )


def check_enumeration_budget(out_size: int, n: int) -> int:
    """Return out_size**n, raising EnumerationBudgetError if it exceeds the cap."""
    required = out_size ** n
    if required > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(required)
    return required


@dataclass(frozen=True, eq=False)
class Dist:
    """A probability distribution over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("distribution must be a non-empty 1-d vector")
        if np.any(p < 0):
            raise ValueError(f"negative probability entry: {p.min()}")
        total = p.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1 within {PROB_TOL}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return self.probs.size

    @staticmethod
    def uniform(k: int) -> "Dist":
        return Dist(np.full(k, 1.0 / k))

    @staticmethod
    def point_mass(k: int, x: int) -> "Dist":
        p = np.zeros(k)
        p[x] = 1.0
        return Dist(p)


@dataclass(frozen=True, eq=False)
class Dmc:
    """A discrete memoryless channel: rows[x][y] = W(y|x), each row a Dist."""

    rows: np.ndarray
    in_size: int = field(init=False)
    out_size: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.rows, dtype=np.float64)
        if m.ndim != 2 or m.size == 0:
            raise ValueError("channel matrix must be a non-empty 2-d array")
        if np.any(m < 0):
            raise ValueError(f"negative transition probability: {m.min()}")
        sums = m.sum(axis=1)
        bad = np.nonzero(np.abs(sums - 1.0) > PROB_TOL)[0]
        if bad.size:
            x = int(bad[0])
            raise ValueError(
                f"row {x} sums to {sums[x]!r}, not 1 within {PROB_TOL}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "rows", m)
        object.__setattr__(self, "in_size", m.shape[0])
        object.__setattr__(self, "out_size", m.shape[1])

    @staticmethod
    def identity(k: int) -> "Dmc":
        return Dmc(np.eye(k))

    @staticmethod
    def bsc(p: float) -> "Dmc":
        """Binary symmetric channel with crossover probability p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"crossover probability {p} outside [0, 1]")
        return Dmc(np.array([[1.0 - p, p], [p, 1.0 - p]]))

    @staticmethod
    def constant(out_dist: Dist, in_size: int) -> "Dmc":
        """Channel whose output is out_dist regardless of the input."""
        return Dmc(np.tile(out_dist.probs, (in_size, 1)))

    def row_dist(self, x: int) -> Dist:
        return Dist(self.rows[x])


@dataclass(frozen=True)
class WiretapPair:
    """Main channel to the receiver and wiretap channel to the eavesdropper."""

    main: Dmc
    wiretap: Dmc

    def __post_init__(self):
        if self.main.in_size != self.wiretap.in_size:
            raise ValueError(
                f"input alphabets differ: main {self.main.in_size}, "
                f"wiretap {self.wiretap.in_size}"
            )

    @property
    def in_size(self) -> int:
        return self.main.in_size


@dataclass(frozen=True)
class JointWord:
    """An (input word, output word) pair of equal length."""

    x_word: tuple
    y_word: tuple

    def __post_init__(self):
        object.__setattr__(self, "x_word", tuple(int(s) for s in self.x_word))
        object.__setattr__(self, "y_word", tuple(int(s) for s in self.y_word))
        if len(self.x_word) != len(self.y_word) or len(self.x_word) < 1:
            raise ValueError("x_word and y_word must have equal length n >= 1")

    @property
    def n(self) -> int:
        return len(self.x_word)


# ---------------------------------------------------------------------------
# scalar information measures
# ---------------------------------------------------------------------------

def entropy(p: Dist) -> float:
    """Shannon entropy in bits, with 0*log(0) = 0."""
    return float(_entropy_vec(p.probs))


def _entropy_vec(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.dot(nz, np.log2(nz)))


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """D(p || q) in bits; +inf where p puts mass outside q's support."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0
    if np.any(q[mask] == 0):
        return float("inf")
    return float(np.dot(p[mask], np.log2(p[mask] / q[mask])))


def l1_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Variational distance sum_i |p_i - q_i|, in [0, 2] for distributions."""
    return float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def mutual_information(p: Dist, w: Dmc) -> float:
    """I(X;Y) = H(Y) - H(Y|X) in bits for input p through channel w."""
    if len(p) != w.in_size:
        raise ValueError(f"input size {len(p)} != channel in_size {w.in_size}")
    out = p.probs @ w.rows
    h_y = _entropy_vec(out)
    h_y_given_x = float(
        np.dot(p.probs, [_entropy_vec(row) for row in w.rows])
    )
    return h_y - h_y_given_x


def output_dist(p: Dist, w: Dmc) -> Dist:
    """Push p through w: the output distribution p @ rows."""
    if len(p) != w.in_size:
        raise ValueError(f"input size {len(p)} != channel in_size {w.in_size}")
    out = p.probs @ w.rows
    return Dist(out / out.sum())


def cascade(u: Dmc, w: Dmc) -> Dmc:
    """Compose two channels: (uw)[x][y] = sum_s u[x][s] w[s][y]."""
    if u.out_size != w.in_size:
        raise ValueError(
            f"cannot cascade: first out_size {u.out_size} != second in_size {w.in_size}"
        )
    m = u.rows @ w.rows
    return Dmc(m / m.sum(axis=1, keepdims=True))


def product_extend(w: Dmc, x_word, y_word) -> float:
    """Memoryless n-fold probability: product of w[x_i][y_i] over positions."""
    x = np.asarray(x_word, dtype=np.intp)
    y = np.asarray(y_word, dtype=np.intp)
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise ValueError("words must be equal-length non-empty sequences")
    if np.any(x < 0) or np.any(x >= w.in_size):
        raise ValueError("input symbol out of range")
    if np.any(y < 0) or np.any(y >= w.out_size):
        raise ValueError("output symbol out of range")
    return float(np.prod(w.rows[x, y]))


def is_full_rank(v: Dmc) -> bool:
    """True iff the rows of v are linearly independent as vectors."""
    s = np.linalg.svd(v.rows, compute_uv=False)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    return rank == v.in_size


# ---------------------------------------------------------------------------
# n-fold word enumeration (big-endian mixed-radix outcome indexing)
# ---------------------------------------------------------------------------
#
# An n-symbol word (z_0, ..., z_{n-1}) over an alphabet of size k maps to the
# flat index sum_i z_i * k**(n-1-i): symbol 0 is the most significant digit.
# np.kron respects exactly this order, so n-fold product distributions are
# built as iterated Kronecker products.

def word_to_index(word, alphabet_size: int) -> int:
    idx = 0
    for s in word:
        idx = idx * alphabet_size + int(s)
    return idx


def index_to_word(idx: int, alphabet_size: int, n: int) -> tuple:
    word = []
    for _ in range(n):
        word.append(idx % alphabet_size)
        idx //= alphabet_size
    return tuple(reversed(word))


def all_words(alphabet_size: int, n: int) -> np.ndarray:
    """All alphabet_size**n words as an array of shape (k**n, n), index order."""
    check_enumeration_budget(alphabet_size, n)
    grids = np.meshgrid(*([np.arange(alphabet_size)] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def word_output_vector(w: Dmc, x_word) -> np.ndarray:
    """W^n(.|x_word) as a flat vector over all out_size**n output words."""
    check_enumeration_budget(w.out_size, len(x_word))
    vec = np.ones(1)
    for s in x_word:
        vec = np.kron(vec, w.rows[int(s)])
    return vec

def iid_output_vector(p: Dist, w: Dmc, n: int) -> np.ndarray:
    """(pW)^n as a flat vector over all out_size**n output words."""
    single = p.probs @ w.rows
    check_enumeration_budget(w.out_size, n)
    vec = np.ones(1)
    for _ in range(n):
        vec = np.kron(vec, single)
    return vec


# ---------------------------------------------------------------------------
# channel files
# ---------------------------------------------------------------------------
#
# A channel file is a JSON document with fields `in_size`, `out_size` and
# `rows`; a wiretap-pair file holds two channel objects under `main` and
# `wiretap`.  Validation failures name the offending row and, when the file
# is laid out one row per line, its line number.

class ChannelFormatError(ValueError):
    """A channel document is malformed or not row-stochastic."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _rows_array_lines(text: str) -> list[list[int]]:
    """Starting line (1-based) of each row of each `rows` array in the text."""
    occurrences = []
    line = 1
    i = 0
    n = len(text)
    in_string = False
    target = None  # (depth of rows array, list collecting row lines)
    depth = 0
    pending_key = False
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
        if in_string:
            if c == "\\":
                i += 2
                continue
            if c == '"':
                in_string = False
            i += 1
            continue
        if c == '"':
            in_string = True
            if text.startswith('"rows"', i):
                pending_key = True
            i += 1
            continue
        if c == "[":
            depth += 1
            if pending_key and target is None:
                target = (depth, [])
                occurrences.append(target[1])
                pending_key = False
            elif target is not None and depth == target[0] + 1:
                target[1].append(line)
        elif c == "]":
            if target is not None and depth == target[0]:
                target = None
            depth -= 1
        elif c == ":" or c.isspace():
            pass
        else:
            pending_key = False
        i += 1
    return occurrences


def _channel_from_obj(obj: dict, row_lines: list[int] | None) -> Dmc:
    for key in ("in_size", "out_size", "rows"):
        if key not in obj:
            raise ChannelFormatError(f"missing field {key!r}")
    rows = obj["rows"]
    if len(rows) != obj["in_size"]:
        raise ChannelFormatError(
            f"declared in_size {obj['in_size']} but {len(rows)} rows present"
        )
    for x, row in enumerate(rows):
        ln = row_lines[x] if row_lines and x < len(row_lines) else None
        if len(row) != obj["out_size"]:
            raise ChannelFormatError(
                f"row {x} has {len(row)} entries, expected {obj['out_size']}", ln
            )
        if any(v < 0 for v in row):
            raise ChannelFormatError(f"row {x} has a negative entry", ln)
        s = sum(row)
        if abs(s - 1.0) > PROB_TOL:
            raise ChannelFormatError(f"row {x} sums to {s!r}, not 1", ln)
    return Dmc(np.array(rows, dtype=np.float64))


def parse_channel(text: str) -> Dmc:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChannelFormatError(f"invalid JSON: {e.msg}", e.lineno) from e
    lines = _rows_array_lines(text)
    return _channel_from_obj(obj, lines[0] if lines else None)


def parse_pair(text: str) -> WiretapPair:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChannelFormatError(f"invalid JSON: {e.msg}", e.lineno) from e
    for key in ("main", "wiretap"):
        if key not in obj:
            raise ChannelFormatError(f"missing field {key!r}")
    lines = _rows_array_lines(text)
    main = _channel_from_obj(obj["main"], lines[0] if len(lines) > 0 else None)
    wiretap = _channel_from_obj(obj["wiretap"], lines[1] if len(lines) > 1 else None)
    return WiretapPair(main, wiretap)


def load_channel(path) -> Dmc:
    with open(path) as f:
        return parse_channel(f.read())


def load_pair(path) -> WiretapPair:
    with open(path) as f:
        return parse_pair(f.read())


def channel_to_obj(w: Dmc) -> dict:
    return {
        "in_size": w.in_size,
        "out_size": w.out_size,
        "rows": [[float(v) for v in row] for row in w.rows],
    }


def save_channel(w: Dmc, path) -> None:
    with open(path, "w") as f:
        json.dump(channel_to_obj(w), f, indent=1)
        f.write("\n")


def save_pair(pair: WiretapPair, path) -> None:
    obj = {"main": channel_to_obj(pair.main), "wiretap": channel_to_obj(pair.wiretap)}
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")
