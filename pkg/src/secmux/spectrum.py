"""Exact finite-blocklength information-density spectra.

The information density of an input/output word pair is the normalized
log-likelihood ratio (1/n) log2 [W^n(y^n|x^n) / P_{Y^n}(y^n)].  For an
i.i.d. input through a memoryless channel this random variable is a sum of
n independent single-letter terms, so its exact distribution (the spectrum)
is computed by discrete convolution: no sampling, no binning error beyond a
fixed value-merge tolerance.

Tail probabilities of the spectrum are exactly the quantities appearing in
the random-coding error bound, the resolvability-based secrecy bounds, and
the converse inequality, so this module is the single source of truth for
all of them.  It is exact-only by design: when the atom count would exceed
the hard cap, it fails loudly and points at the Monte Carlo tail estimator
in the ensemble module instead of degrading silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Dist, Dmc, mutual_information

# Atoms whose un-normalized (total, not per-symbol) log values differ by less
# than this are treated as the same value and their masses summed.
MERGE_TOL = 1e-12

MASS_TOL = 1e-9

# Exact convolution gives up beyond this many result atoms.
ATOM_CAP = 10 ** 6


class AtomBudgetError(ValueError):
    """Exact convolution would exceed the atom cap."""

    def __init__(self, required: int):
        self.required = required
        super().__init__(
            f"exact spectrum needs ~{required} atoms, cap is {ATOM_CAP}; "
            "use the Monte Carlo tail estimator in secmux.ensemble instead"
        )


def _merge_atoms(totals: np.ndarray, masses: np.ndarray):
    """Sort by total log value and merge runs closer than MERGE_TOL."""
    order = np.argsort(totals, kind="stable")
    t = totals[order]
    m = masses[order]
    if t.size == 0:
        raise ValueError("spectrum has no atoms")
    # new cluster wherever the gap to the previous atom reaches the tolerance
    starts = np.concatenate(([0], np.nonzero(np.diff(t) >= MERGE_TOL)[0] + 1))
    mass = np.add.reduceat(m, starts)
    # mass-weighted representative keeps the mean exact
    total = np.add.reduceat(t * m, starts) / mass
    return total, mass


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Finite distribution of the per-symbol information density at blocklength n.

    values are in bits per symbol, strictly increasing; masses sum to 1.
    """

    values: np.ndarray
    masses: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        m = np.asarray(self.masses, dtype=np.float64)
        if v.shape != m.shape or v.ndim != 1:
            raise ValueError("values and masses must be 1-d arrays of equal length")
        if self.n < 1:
            raise ValueError("blocklength must be >= 1")
        if np.any(m < 0):
            raise ValueError("negative atom mass")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"atom masses sum to {m.sum()!r}, not 1")
        if np.any(np.diff(v) <= 0):
            raise ValueError("atom values must be strictly increasing")
        v.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "masses", m)

    def __len__(self) -> int:
        return self.values.size

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.masses.tolist()))


def single_letter_spectrum(p: Dist, w: Dmc) -> Spectrum:
    """Spectrum of log2(w[x][y] / (pW)[y]) under the joint law p[x] w[x][y]."""
    if len(p) != w.in_size:
        raise ValueError(f"input size {len(p)} != channel in_size {w.in_size}")
    out = p.probs @ w.rows
    joint = p.probs[:, None] * w.rows
    xs, ys = np.nonzero(joint > 0)
    # positive joint mass forces positive output probability
    assert np.all(out[ys] > 0)
    totals = np.log2(w.rows[xs, ys] / out[ys])
    values, masses = _merge_atoms(totals, joint[xs, ys])
    return Spectrum(values, masses, n=1)


def convolve_spectrum(s: Spectrum, base: Spectrum) -> Spectrum:
    """Spectrum of the sum of independent draws from s and base.

    The result lives at blocklength s.n + base.n with values re-normalized
    to bits per symbol.
    """
    pairs = len(s) * len(base)
    if pairs > 10 * ATOM_CAP:
        raise AtomBudgetError(pairs)
    t1 = s.values * s.n
    t2 = base.values * base.n
    totals = (t1[:, None] + t2[None, :]).ravel()
    masses = (s.masses[:, None] * base.masses[None, :]).ravel()
    total, mass = _merge_atoms(totals, masses)
    if total.size > ATOM_CAP:
        raise AtomBudgetError(total.size)
    n = s.n + base.n
    return Spectrum(total / n, mass, n=n)


def iid_spectrum(p: Dist, w: Dmc, n: int) -> Spectrum:
    """Exact density spectrum of n i.i.d. uses of w with input p."""
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    base = single_letter_spectrum(p, w)
    spec = base
    for _ in range(n - 1):
        spec = convolve_spectrum(spec, base)
    return spec


def tail_below(s: Spectrum, a: float) -> float:
    """Probability that the per-symbol density is strictly below a."""
    return float(s.masses[s.values < a].sum())


def tail_above(s: Spectrum, b: float) -> float:
    """Probability that the per-symbol density is strictly above b."""
    return float(s.masses[s.values > b].sum())


def spectrum_mean(s: Spectrum) -> float:
    """Mean density in bits; equals the single-letter mutual information."""
    return float(np.dot(s.values, s.masses))


def expected_mean(p: Dist, w: Dmc) -> float:
    """Reference value for spectrum_mean, from the mutual information."""
    return mutual_information(p, w)


def spectrum_to_csv(s: Spectrum, path) -> None:
    """Write a two-column CSV (value, mass) for plotting."""
    with open(path, "w") as f:
        f.write("value,mass\n")
        for v, m in zip(s.values, s.masses):
            f.write(f"{float(v)!r},{float(m)!r}\n")
