"""Channel resolvability experiments: synthesizing an output distribution.

A uniform random number with M_n = round(2^(n rate)) values is encoded by a
random codebook (the codeword list itself is the encoder) and pushed through
the channel; the achieved output distribution is the uniform mixture of the
per-codeword product distributions, computed exactly.  The figure of merit
is its variational distance to the target output (pV)^n.

Above the mutual information I(p, V) the distance should shrink with
blocklength; below it, for a full-rank channel, it cannot vanish.  At desk
scale both are visible only as trends, which the sweep helper tabulates.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import (
    Dist,
    Dmc,
    check_enumeration_budget,
    iid_output_vector,
    l1_distance,
    word_output_vector,
)


@dataclass(frozen=True)
class ResolvabilityRun:
    """One seeded synthesis attempt and its achieved distance."""

    v: Dmc
    p: Dist
    n: int
    rate: float
    seed: int
    m_n: int
    d_value: float

    def __post_init__(self):
        if not 0.0 <= self.d_value <= 2.0 + 1e-12:
            raise ValueError(f"variational distance {self.d_value} outside [0, 2]")


def codebook_size(n: int, rate: float) -> int:
    return max(1, round(2.0 ** (n * rate)))


def resolvability_distance(v: Dmc, p: Dist, n: int, rate: float, seed: int) -> float:
    """Exact L1 distance between the synthesized and target output distributions."""
    return resolvability_run(v, p, n, rate, seed).d_value


def resolvability_run(v: Dmc, p: Dist, n: int, rate: float, seed: int) -> ResolvabilityRun:
    check_enumeration_budget(v.out_size, n)
    m_n = codebook_size(n, rate)
    rng = np.random.default_rng(seed)
    words = rng.choice(len(p), size=(m_n, n), p=p.probs)
    achieved = np.zeros(v.out_size ** n)
    for x in words:
        achieved += word_output_vector(v, x)
    achieved /= m_n
    assert abs(achieved.sum() - 1.0) <= 1e-9
    target = iid_output_vector(p, v, n)
    d = l1_distance(achieved, target)
    return ResolvabilityRun(v=v, p=p, n=n, rate=rate, seed=seed, m_n=m_n, d_value=d)


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Mean achieved distance per (n, rate) cell over a common seed list."""

    n_list: tuple
    rate_list: tuple
    num_seeds: int
    mean_d: np.ndarray    # shape (len(n_list), len(rate_list))
    stderr: np.ndarray

    def cell(self, n: int, rate: float) -> float:
        return float(self.mean_d[self.n_list.index(n), self.rate_list.index(rate)])


def rate_sweep(
    v: Dmc,
    p: Dist,
    n_list,
    rate_list,
    seeds,
    threads: int = 1,
) -> SweepTable:
    """Grid of mean distances over blocklengths and rates, same seeds per cell."""
    n_list = tuple(int(n) for n in n_list)
    rate_list = tuple(float(r) for r in rate_list)
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    cells = [(i, j, n, r) for i, n in enumerate(n_list) for j, r in enumerate(rate_list)]

    def one_cell(cell):
        i, j, n, r = cell
        ds = np.array([resolvability_distance(v, p, n, r, s) for s in seeds])
        err = ds.std(ddof=1) / math.sqrt(len(seeds)) if len(seeds) > 1 else 0.0
        return i, j, float(ds.mean()), float(err)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_cell, cells))
    else:
        results = [one_cell(c) for c in cells]

    mean_d = np.zeros((len(n_list), len(rate_list)))
    stderr = np.zeros_like(mean_d)
    for i, j, m, e in results:
        mean_d[i, j] = m
        stderr[i, j] = e
    return SweepTable(
        n_list=n_list, rate_list=rate_list, num_seeds=len(seeds),
        mean_d=mean_d, stderr=stderr,
    )


def sweep_to_csv(table: SweepTable, path, provenance: dict | None = None) -> None:
    with open(path, "w") as f:
        if provenance:
            f.write("# " + " ".join(f"{k}={v}" for k, v in sorted(provenance.items())) + "\n")
        f.write("n,rate,mean_d,stderr,seeds\n")
        for i, n in enumerate(table.n_list):
            for j, r in enumerate(table.rate_list):
                f.write(
                    f"{n},{r!r},{float(table.mean_d[i, j])!r},"
                    f"{float(table.stderr[i, j])!r},{table.num_seeds}\n"
                )
