"""Config-driven experiment runner: `secmux run CONFIG`, `secmux describe CONFIG`.

A config is a JSON document with a `kind` field selecting the experiment
(capacity, region, code_eval, ensemble, resolvability) plus the
kind-specific parameters documented in the README.  Every run derives all
randomness from the config's master_seed, embeds the config hash and seed in
each report, and writes no timestamps, so rerunning a config reproduces the
report files byte for byte.

Failures exit nonzero and print a one-line JSON error record to stderr:
2 for config or channel-file problems, 3 for exceeded enumeration budgets,
1 for anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .channels import (
    ChannelFormatError,
    Dist,
    Dmc,
    EnumerationBudgetError,
    load_channel,
    load_pair,
)
from .capacity import (
    RateTuple,
    RegionSpec,
    channel_capacity,
    minimal_t,
    region_membership,
    secrecy_capacity,
    secrecy_gap,
)
from .ensemble import (
    BoundInputs,
    achievability_params,
    ensemble_experiment,
    existence_check,
    trial_seeds,
)
from .multiplex import generate_codebook
from .resolvability import codebook_size, rate_sweep, sweep_to_csv
from .security import report_to_csv, security_report
from .spectrum import AtomBudgetError

KINDS = ("capacity", "region", "code_eval", "ensemble", "resolvability")


class ConfigError(ValueError):
    """The experiment config is malformed or incomplete."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message)


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config line {e.lineno}: {e.msg}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}", field="kind")
    return cfg


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _require(cfg: dict, field: str):
    if field not in cfg:
        raise ConfigError(f"missing required field {field!r}", field=field)
    return cfg[field]


def _seed(cfg: dict) -> int:
    seed = cfg.get("master_seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError("master_seed must be a 64-bit unsigned integer", "master_seed")
    return seed


def _input_dist(cfg: dict, size: int) -> Dist:
    if "input_dist" not in cfg or cfg["input_dist"] == "uniform":
        return Dist.uniform(size)
    try:
        return Dist(np.array(cfg["input_dist"], dtype=np.float64))
    except ValueError as e:
        raise ConfigError(f"input_dist: {e}", field="input_dist") from e


def _resolve_paths(cfg: dict, config_path):
    """Channel paths are taken relative to the config file's directory."""
    base = Path(config_path).parent
    out = dict(cfg)
    for key in ("pair", "channel"):
        if key in out and isinstance(out[key], str):
            p = Path(out[key])
            out[key] = str(p if p.is_absolute() else base / p)
    return out


def _json_ready(value):
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    return value


def _write_summary(out_dir: Path, kind: str, payload: dict) -> Path:
    path = out_dir / f"{kind}_summary.json"
    with open(path, "w") as f:
        json.dump(_json_ready(payload), f, sort_keys=True, indent=1)
        f.write("\n")
    return path


# ---------------------------------------------------------------------------
# experiment implementations
# ---------------------------------------------------------------------------

def _run_capacity(cfg, out_dir, provenance, threads):
    tol = float(cfg.get("tol", 1e-9))
    result: dict = dict(provenance)
    if "pair" in cfg:
        pair = load_pair(cfg["pair"])
        cap, p_star = channel_capacity(pair.main, tol=tol)
        sol = secrecy_capacity(
            pair,
            restarts=int(cfg.get("restarts", 8)),
            tol=tol,
            seed=_seed(cfg),
        )
        gap = secrecy_gap(p_star, pair)
        if gap > 0:
            t = minimal_t(p_star, pair)
            equal_rate = [cap / t] * t
        else:
            t = None
            equal_rate = None
        result.update(
            capacity=cap,
            capacity_input=p_star.probs,
            secrecy_value=sol.value,
            secrecy_certified=sol.certified_global,
            minimal_T=t,
            equal_rate_tuple=equal_rate,
        )
    else:
        channel = load_channel(_require(cfg, "channel"))
        cap, p_star = channel_capacity(channel, tol=tol)
        result.update(
            capacity=cap,
            capacity_input=p_star.probs,
            secrecy_value=None,
            secrecy_certified=None,
            minimal_T=None,
            equal_rate_tuple=None,
        )
    return [_write_summary(out_dir, "capacity", result)]


def _run_region(cfg, out_dir, provenance, threads):
    pair = load_pair(_require(cfg, "pair"))
    rates = RateTuple(tuple(_require(cfg, "rates")))
    mode = cfg.get("mode", "deterministic")
    spec = RegionSpec(pair, T=len(rates), mode=mode)
    p = _input_dist(cfg, pair.in_size)
    u = None
    if "test_channel" in cfg:
        u = Dmc(np.array(cfg["test_channel"], dtype=np.float64))
    member = region_membership(rates, spec, p, u)
    result = dict(
        provenance,
        member=member,
        mode=mode,
        rates=list(rates.rates),
        total_rate=rates.total,
    )
    return [_write_summary(out_dir, "region", result)]


def _run_code_eval(cfg, out_dir, provenance, threads):
    pair = load_pair(_require(cfg, "pair"))
    p = _input_dist(cfg, pair.in_size)
    n = int(_require(cfg, "n"))
    sizes = tuple(int(m) for m in _require(cfg, "sizes"))
    a = float(_require(cfg, "a"))
    code = generate_codebook(p, n, sizes, a, _seed(cfg))
    report = security_report(code, pair, p)
    csv_path = out_dir / "code_eval_report.csv"
    report_to_csv(report, csv_path, provenance)
    summary = dict(
        provenance,
        n=n,
        sizes=list(sizes),
        threshold_a=a,
        per_message=[
            dict(
                t=r.t, M_t=r.m_t, L_t=r.l_t, eps=r.eps,
                leak_total_bits=r.leak_total, leak_rate=r.leak_rate,
                vd=r.vd, erasure_frac=r.erasure_frac,
            )
            for r in report.per_message
        ],
    )
    return [csv_path, _write_summary(out_dir, "code_eval", summary)]


def _ensemble_inputs(cfg, pair, p) -> BoundInputs:
    auto = cfg.get("a") == "auto" or cfg.get("b") == "auto" or "sizes" not in cfg
    if auto:
        rates = RateTuple(tuple(_require(cfg, "rates")))
        gamma = float(_require(cfg, "gamma"))
        n = int(_require(cfg, "n"))
        return achievability_params(p, pair, rates, gamma, n)
    return BoundInputs(
        pair=pair,
        p=p,
        n=int(_require(cfg, "n")),
        sizes=tuple(int(m) for m in _require(cfg, "sizes")),
        a=float(_require(cfg, "a")),
        b=float(_require(cfg, "b")),
    )


def _run_ensemble(cfg, out_dir, provenance, threads):
    pair = load_pair(_require(cfg, "pair"))
    p = _input_dist(cfg, pair.in_size)
    bi = _ensemble_inputs(cfg, pair, p)
    trials = int(_require(cfg, "trials"))
    er = ensemble_experiment(bi, trials=trials, master_seed=_seed(cfg), threads=threads)
    means = er.means()
    errs = er.stderrs()
    checks = er.bound_checks()

    csv_path = out_dir / "ensemble_trials.csv"
    with open(csv_path, "w") as f:
        f.write("# " + " ".join(f"{k}={v}" for k, v in sorted(provenance.items())) + "\n")
        heads = [f"{q}_{t + 1}" for q in ("eps", "vd", "leak_rate") for t in range(er.T)]
        f.write("row,seed," + ",".join(heads) + "\n")
        for i in range(trials):
            vals = [er.eps[i], er.vd[i], er.leak_rate[i]]
            flat = ",".join(repr(float(v)) for arr in vals for v in arr)
            f.write(f"trial{i},{er.seeds[i]},{flat}\n")
        mean_flat = ",".join(
            repr(float(v)) for key in ("eps", "vd", "leak_rate") for v in means[key]
        )
        f.write(f"mean,,{mean_flat}\n")
        if errs["eps"] is not None:
            err_flat = ",".join(
                repr(float(v)) for key in ("eps", "vd", "leak_rate") for v in errs[key]
            )
            f.write(f"stderr,,{err_flat}\n")
        bound_flat = ",".join(
            repr(float(v))
            for vec in (
                [er.bounds.eps_bound] * er.T,
                er.bounds.d_bounds,
                er.bounds.leak_bounds,
            )
            for v in vec
        )
        f.write(f"bound,,{bound_flat}\n")

    summary = dict(
        provenance,
        n=bi.n,
        sizes=list(bi.sizes),
        a=bi.a,
        b=bi.b,
        slack_eps=bi.slack_eps,
        slack_leak=bi.slack_leak,
        trials=trials,
        delta_n=er.bounds.delta_n,
        eps_bound=er.bounds.eps_bound,
        d_bounds=list(er.bounds.d_bounds),
        leak_bounds=list(er.bounds.leak_bounds),
        mean_eps=means["eps"],
        mean_vd=means["vd"],
        mean_leak_rate=means["leak_rate"],
        stderr_eps=errs["eps"],
        stderr_vd=errs["vd"],
        stderr_leak_rate=errs["leak_rate"],
        within_bounds={k: v for k, v in checks.items()},
        all_within_bounds=er.all_within_bounds,
        existence=existence_check(er),
    )
    return [csv_path, _write_summary(out_dir, "ensemble", summary)]


def _resolvability_channel(cfg) -> Dmc:
    if "channel" in cfg:
        return load_channel(cfg["channel"])
    return load_pair(_require(cfg, "pair")).wiretap


def _run_resolvability(cfg, out_dir, provenance, threads):
    v = _resolvability_channel(cfg)
    p = _input_dist(cfg, v.in_size)
    n_list = [int(n) for n in _require(cfg, "n_list")]
    rate_list = [float(r) for r in _require(cfg, "rate_list")]
    num_seeds = int(_require(cfg, "seeds"))
    seeds = trial_seeds(_seed(cfg), num_seeds)
    table = rate_sweep(v, p, n_list, rate_list, seeds, threads=threads)
    csv_path = out_dir / "resolvability_sweep.csv"
    sweep_to_csv(table, csv_path, provenance)
    summary = dict(
        provenance,
        n_list=n_list,
        rate_list=rate_list,
        seeds=num_seeds,
        mean_d=table.mean_d,
        stderr=table.stderr,
    )
    return [csv_path, _write_summary(out_dir, "resolvability", summary)]


_RUNNERS = {
    "capacity": _run_capacity,
    "region": _run_region,
    "code_eval": _run_code_eval,
    "ensemble": _run_ensemble,
    "resolvability": _run_resolvability,
}


# ---------------------------------------------------------------------------
# describe (dry-run plan)
# ---------------------------------------------------------------------------

def describe(cfg: dict) -> list[str]:
    kind = cfg["kind"]
    lines = [f"kind: {kind}"]
    if kind == "capacity":
        target = "pair" if "pair" in cfg else "channel"
        lines.append(f"plan: alternating-maximization capacity solve on {cfg.get(target)}")
        if target == "pair":
            lines.append(
                f"plan: secrecy search with {int(cfg.get('restarts', 8))} restarts"
            )
    elif kind == "region":
        lines.append("plan: 2 mutual-information evaluations against the rate tuple")
    elif kind == "code_eval":
        pair = load_pair(_require(cfg, "pair"))
        n = int(_require(cfg, "n"))
        sizes = [int(m) for m in _require(cfg, "sizes")]
        ny = pair.main.out_size ** n
        nz = pair.wiretap.out_size ** n
        lines.append(f"plan: exact evaluation of 1 codebook with {int(np.prod(sizes))} codewords")
        lines.append(f"outcome space: {ny} receiver outcomes, {nz} eavesdropper outcomes")
        lines.append(f"budget required: {max(ny, nz)} (cap 2^24 = {2 ** 24})")
    elif kind == "ensemble":
        trials = int(_require(cfg, "trials"))
        pair = load_pair(_require(cfg, "pair"))
        p = _input_dist(cfg, pair.in_size)
        bi = _ensemble_inputs(cfg, pair, p)
        ny = pair.main.out_size ** bi.n
        nz = pair.wiretap.out_size ** bi.n
        lines.append(f"plan: {trials} codebook evaluations, sizes {list(bi.sizes)}")
        lines.append(f"thresholds: a={bi.a!r} b={bi.b!r}")
        lines.append(f"outcome space: {ny} receiver outcomes, {nz} eavesdropper outcomes")
    elif kind == "resolvability":
        n_list = [int(n) for n in _require(cfg, "n_list")]
        rate_list = [float(r) for r in _require(cfg, "rate_list")]
        num_seeds = int(_require(cfg, "seeds"))
        cells = len(n_list) * len(rate_list)
        lines.append(
            f"plan: {cells * num_seeds} runs ({len(n_list)}x{len(rate_list)} grid "
            f"x {num_seeds} seeds)"
        )
        v = _resolvability_channel(cfg)
        largest = max(codebook_size(n, r) for n in n_list for r in rate_list)
        lines.append(f"largest codebook: {largest} codewords")
        lines.append(f"outcome space at largest n: {v.out_size ** max(n_list)}")
    return lines


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _error_record(exc: Exception) -> tuple[int, dict]:
    if isinstance(exc, (ConfigError, ChannelFormatError)):
        record = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError) and exc.field:
            record["field"] = exc.field
        if isinstance(exc, ChannelFormatError) and exc.line is not None:
            record["line"] = exc.line
        return 2, record
    if isinstance(exc, (EnumerationBudgetError, AtomBudgetError)):
        record = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, EnumerationBudgetError):
            record["required"] = exc.required
            record["budget"] = exc.budget
        return 3, record
    return 1, {"type": type(exc).__name__, "message": str(exc)}


def run(config_path, out_dir=None, threads: int = 1) -> list:
    """Execute the config and return the list of written report paths."""
    cfg = load_config(config_path)
    cfg = _resolve_paths(cfg, config_path)
    out = Path(out_dir) if out_dir else Path(cfg.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    provenance = {
        "config_hash": config_hash(load_config(config_path)),
        "master_seed": _seed(cfg),
        "kind": cfg["kind"],
    }
    return _RUNNERS[cfg["kind"]](cfg, out, provenance, threads)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="secmux",
        description="Wiretap-channel multiplex coding experiments from JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory for reports")
    p_run.add_argument("--threads", type=int, default=1, help="worker thread cap")
    p_desc = sub.add_parser("describe", help="print the plan without executing")
    p_desc.add_argument("config")
    args = parser.parse_args(argv)

    try:
        if args.command == "describe":
            cfg = load_config(args.config)
            cfg = _resolve_paths(cfg, args.config)
            for line in describe(cfg):
                print(line)
            return 0
        paths = run(args.config, out_dir=args.out, threads=args.threads)
        for p in paths:
            print(p)
        return 0
    except Exception as exc:  # noqa: BLE001 - every failure becomes a record
        code, record = _error_record(exc)
        print(json.dumps({"error": record}, sort_keys=True), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
