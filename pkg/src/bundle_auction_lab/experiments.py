"""Config-driven experiment runner with deterministic CSV reports.

Configs are strict JSON: unknown keys are rejected with their path, the seed
is mandatory, and distributions are validated at parse time.  Reports
serialize to CSV with a fixed header, floats at 12 significant digits and a
deterministic row order, so rerunning a config with the same seed reproduces
the output byte for byte; wall time and other run metadata live in the
report footer, never in the CSV.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from . import __version__
from .group_revenue import (
    bernstein_sweep,
    bernstein_upper_bound,
    group_expected_revenue_mc,
    optimize_group_offer,
    verify_surplus_extraction,
)
from .pair_revenue import (
    DEFAULT_EPS_GRID,
    optimize_pair_offer,
    verify_pair_improvement,
)
from .single_pricing import optimal_single_price
from .valuations import ValuationDistribution, make_piecewise_linear, make_uniform

__all__ = [
    "COMMANDS",
    "ConfigError",
    "ExperimentConfig",
    "RunReport",
    "build_distribution",
    "parse_config",
    "serialize_config",
    "run",
    "partition_experiment",
    "emit_csv",
    "render_footer",
]

COMMANDS = ("single-opt", "pair-opt", "verify-thm1", "verify-thm2",
            "partition", "sweep")

DEFAULT_N_SAMPLES = 100_000

_COMMAND_KEYS = {
    "single-opt": frozenset(),
    "pair-opt": frozenset({"budget"}),
    "verify-thm1": frozenset({"eps_grid"}),
    "verify-thm2": frozenset({"n_list"}),
    "partition": frozenset({"N", "budget", "mode"}),
    "sweep": frozenset({"n_min", "n_max", "M"}),
}
_COMMON_KEYS = frozenset({"command", "seed", "n_samples", "distributions", "out"})


class ConfigError(ValueError):
    """Malformed or schema-violating experiment config."""


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    seed: int
    n_samples: int = DEFAULT_N_SAMPLES
    distributions: tuple = ()
    eps_grid: Optional[tuple[float, ...]] = None
    n_list: Optional[tuple[int, ...]] = None
    N: Optional[int] = None
    budget: Optional[int] = None
    mode: Optional[str] = None
    n_min: Optional[int] = None
    n_max: Optional[int] = None
    M: Optional[float] = None
    out: Optional[str] = None
    built: tuple[ValuationDistribution, ...] = field(
        default=(), compare=False, repr=False
    )


@dataclass(frozen=True)
class RunReport:
    """Results plus run metadata; only columns/rows reach the CSV."""

    command: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    config_json: str
    version: str
    wall_time_s: float
    passed: Optional[bool] = None
    notes: tuple[str, ...] = ()


def build_distribution(desc: dict, path: str = "$") -> ValuationDistribution:
    """Build a distribution from its config descriptor."""
    if not isinstance(desc, dict):
        raise ConfigError(f"{path}: distribution descriptor must be an object")
    kind = desc.get("type")
    if kind == "uniform":
        _reject_unknown(desc, {"type", "M"}, path)
        m = _number(desc, "M", path)
        try:
            return make_uniform(m)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if kind == "piecewise_linear":
        _reject_unknown(desc, {"type", "knots", "densities"}, path)
        knots = _number_list(desc, "knots", path)
        densities = _number_list(desc, "densities", path)
        try:
            return make_piecewise_linear(knots, densities)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(
        f"{path}.type: expected 'uniform' or 'piecewise_linear', got {kind!r}"
    )


def _reject_unknown(obj: dict, allowed, path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}.{key}")


def _number(obj: dict, key: str, path: str) -> float:
    if key not in obj:
        raise ConfigError(f"missing required field {path}.{key}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(v)


def _number_list(obj: dict, key: str, path: str) -> list[float]:
    if key not in obj:
        raise ConfigError(f"missing required field {path}.{key}")
    v = obj[key]
    if not isinstance(v, list):
        raise ConfigError(f"{path}.{key}: expected a list of numbers")
    out = []
    for i, x in enumerate(v):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"{path}.{key}[{i}]: expected a number")
        out.append(float(x))
    return out


def _integer(value, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}")
    return value


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment config."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("$: config must be a JSON object")

    command = raw.get("command")
    if command is None:
        raise ConfigError("missing required field $.command")
    if command not in COMMANDS:
        raise ConfigError(
            f"$.command: expected one of {', '.join(COMMANDS)}; got {command!r}"
        )
    _reject_unknown(raw, _COMMON_KEYS | _COMMAND_KEYS[command], "$")

    if "seed" not in raw:
        raise ConfigError("missing required field $.seed")
    seed = _integer(raw["seed"], "$.seed", minimum=0)
    if seed >= 1 << 64:
        raise ConfigError("$.seed: must fit in 64 bits")

    n_samples = _integer(raw.get("n_samples", DEFAULT_N_SAMPLES),
                         "$.n_samples", minimum=1)

    descs = raw.get("distributions", [])
    if not isinstance(descs, list):
        raise ConfigError("$.distributions: expected a list")
    built = tuple(
        build_distribution(d, f"$.distributions[{i}]")
        for i, d in enumerate(descs)
    )

    kwargs: dict = {}
    if command == "verify-thm1":
        grid = raw.get("eps_grid")
        if grid is not None:
            vals = _number_list({"eps_grid": grid}, "eps_grid", "$")
            if not vals:
                raise ConfigError("$.eps_grid: must be nonempty")
            kwargs["eps_grid"] = tuple(vals)
    if command == "verify-thm2":
        ns = raw.get("n_list")
        if ns is not None:
            if not isinstance(ns, list) or not ns:
                raise ConfigError("$.n_list: expected a nonempty list of integers")
            kwargs["n_list"] = tuple(
                _integer(x, f"$.n_list[{i}]", minimum=2) for i, x in enumerate(ns)
            )
    if command == "partition":
        if "N" not in raw:
            raise ConfigError("missing required field $.N")
        kwargs["N"] = _integer(raw["N"], "$.N", minimum=1)
        if "mode" in raw:
            if raw["mode"] not in ("pure_bundle", "full"):
                raise ConfigError("$.mode: expected 'pure_bundle' or 'full'")
            kwargs["mode"] = raw["mode"]
    if command in ("pair-opt", "partition") and "budget" in raw:
        kwargs["budget"] = _integer(raw["budget"], "$.budget", minimum=1)
    if command == "sweep":
        if "n_min" in raw:
            kwargs["n_min"] = _integer(raw["n_min"], "$.n_min", minimum=2)
        if "n_max" in raw:
            kwargs["n_max"] = _integer(raw["n_max"], "$.n_max", minimum=2)
        if "M" in raw:
            kwargs["M"] = _number(raw, "M", "$")
    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("$.out: expected a string path")

    return ExperimentConfig(
        command=command,
        seed=seed,
        n_samples=n_samples,
        distributions=tuple(descs),
        out=out,
        built=built,
        **kwargs,
    )


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical JSON for a config; `parse_config` round-trips it."""
    doc: dict = {
        "command": config.command,
        "seed": config.seed,
        "n_samples": config.n_samples,
        "distributions": list(config.distributions),
    }
    for key in ("eps_grid", "n_list"):
        val = getattr(config, key)
        if val is not None:
            doc[key] = list(val)
    for key in ("N", "budget", "mode", "n_min", "n_max", "M", "out"):
        val = getattr(config, key)
        if val is not None:
            doc[key] = val
    return json.dumps(doc, sort_keys=True)


def _fmt(value) -> str:
    if value is None:
        return "NO_SALE"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit_csv(report: RunReport, destination) -> None:
    """Write the report table as UTF-8 CSV (header first, '\\n' endings)."""
    if hasattr(destination, "write"):
        _write_csv(report, destination)
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        _write_csv(report, fh)


def _write_csv(report: RunReport, fh) -> None:
    fh.write(",".join(report.columns) + "\n")
    for row in report.rows:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def csv_text(report: RunReport) -> str:
    buf = io.StringIO()
    _write_csv(report, buf)
    return buf.getvalue()


def render_footer(report: RunReport) -> str:
    """Run metadata block (kept out of the CSV for byte-reproducibility)."""
    lines = [
        f"# bundle-auction-lab {report.version}",
        f"# command: {report.command}",
        f"# config: {report.config_json}",
    ]
    for note in report.notes:
        lines.append(f"# note: {note}")
    if report.passed is not None:
        lines.append(f"# status: {'pass' if report.passed else 'FAIL'}")
    lines.append(f"# wall_time_s: {report.wall_time_s:.3f}")
    return "\n".join(lines) + "\n"


def _require_dists(config: ExperimentConfig, count: Optional[int]) -> None:
    have = len(config.built)
    if count is not None and have != count:
        raise ConfigError(
            f"command {config.command!r} needs exactly {count} distributions, "
            f"got {have}"
        )
    if count is None and have < 1:
        raise ConfigError(f"command {config.command!r} needs a distribution")


def run(config: ExperimentConfig, *, out_path: Optional[str] = None,
        threads: Optional[int] = None) -> RunReport:
    """Execute a config and return (and optionally write) its report.

    Verification failures are recorded in ``passed`` -- they are data, not
    exceptions.  The CSV is written to ``out_path`` or ``config.out`` when
    given.
    """
    t0 = time.perf_counter()
    if config.command == "single-opt":
        result = _run_single_opt(config)
    elif config.command == "pair-opt":
        result = _run_pair_opt(config, threads)
    elif config.command == "verify-thm1":
        result = _run_verify_pair(config)
    elif config.command == "verify-thm2":
        result = _run_verify_group(config)
    elif config.command == "partition":
        result = partition_result(config, threads)
    elif config.command == "sweep":
        result = _run_sweep(config)
    else:  # pragma: no cover - parse_config guards this
        raise ConfigError(f"unknown command {config.command!r}")
    columns, rows, passed, notes = result
    report = RunReport(
        command=config.command,
        columns=tuple(columns),
        rows=tuple(tuple(r) for r in rows),
        config_json=serialize_config(config),
        version=__version__,
        wall_time_s=time.perf_counter() - t0,
        passed=passed,
        notes=tuple(notes),
    )
    target = out_path or config.out
    if target:
        emit_csv(report, target)
    return report


def _run_single_opt(config):
    _require_dists(config, None)
    rows = []
    for dist in config.built:
        sol = optimal_single_price(dist)
        rows.append((sol.price, sol.utility))
    return ("p_star", "u_star"), rows, None, ()


def _run_pair_opt(config, threads):
    _require_dists(config, 2)
    d1, d2 = config.built
    budget = config.budget or 15
    columns = ("mode", "a_1", "a_2", "bundle_price", "expected_revenue")
    rows = []
    offer, value = optimize_pair_offer(d1, d2, budget, threads=threads)
    rows.append(("full", offer.individual_prices[0], offer.individual_prices[1],
                 offer.bundle_price, value))
    offer_pb, value_pb = optimize_pair_offer(
        d1, d2, budget, pure_bundle_only=True, threads=threads
    )
    rows.append(("pure_bundle", offer_pb.individual_prices[0],
                 offer_pb.individual_prices[1], offer_pb.bundle_price, value_pb))
    return columns, rows, None, ()


def _run_verify_pair(config):
    _require_dists(config, 2)
    d1, d2 = config.built
    report = verify_pair_improvement(d1, d2, config.eps_grid or DEFAULT_EPS_GRID)
    columns = ("eps", "source", "accept_prob", "bundle_part", "solo_1",
               "solo_2", "total", "improvement", "p1_star", "p2_star",
               "u_singles")
    rows = []
    entries = [(ev, "grid") for ev in report.evaluations]
    if report.refined is not None:
        entries.append((report.refined, "refined"))
    for ev, source in entries:
        bd = ev.breakdown
        rows.append((ev.eps, source, bd.accept_probability, bd.bundle_part,
                     bd.solo_part_1, bd.solo_part_2, bd.total, ev.improvement,
                     report.p1_star, report.p2_star, report.singles_value))
    return columns, rows, report.improved, ()


def _run_verify_group(config):
    _require_dists(config, 1)
    n_list = config.n_list or (100, 1000)
    reports = verify_surplus_extraction(
        config.built[0], n_list, config.n_samples, config.seed
    )
    columns = ("n", "mu", "bundle_price", "accept_prob", "revenue_estimate",
               "revenue_std_error", "lower_bound", "upper_bound",
               "bernstein_bound", "lower_bound_ok", "upper_bound_ok")
    rows = [
        (r.n, r.mu, r.bundle_price, r.accept_prob_estimate, r.revenue_estimate,
         r.revenue_std_error, r.lower_bound, r.upper_bound, r.bernstein_bound,
         r.lower_bound_ok, r.upper_bound_ok)
        for r in reports
    ]
    return columns, rows, all(r.passes for r in reports), ()


def _run_sweep(config):
    n_min = config.n_min or 2
    n_max = config.n_max or 10**6
    m = config.M if config.M is not None else 1.0
    if n_max < n_min:
        raise ConfigError("$.n_max must be >= $.n_min")
    ok, worst_n, worst_ratio = bernstein_sweep(n_min, n_max, m)
    # Log-spaced checkpoint rows; the pass flag covers the full range.
    count = 25
    ratio = (n_max / n_min) ** (1.0 / (count - 1)) if n_max > n_min else 1.0
    ns = sorted({
        min(n_max, max(n_min, round(n_min * ratio**i))) for i in range(count)
    })
    rows = []
    for n in ns:
        t = 2.0 * m * math.sqrt(n * math.log(n))
        bound = bernstein_upper_bound(n, m, t)
        rows.append((n, t, bound, 1.0 / n, bound <= 1.0 / n))
    columns = ("n", "t", "bernstein_bound", "one_over_n", "holds")
    notes = (f"worst n={worst_n} with bound*n={worst_ratio:.6g} over "
             f"[{n_min}, {n_max}]",)
    return columns, rows, ok, notes


def partition_experiment(config: ExperimentConfig, *,
                         out_path: Optional[str] = None,
                         threads: Optional[int] = None) -> RunReport:
    """Mixed-partition exploration driver (see :func:`partition_result`)."""
    cfg = config if config.command == "partition" else replace(
        config, command="partition"
    )
    return run(cfg, out_path=out_path, threads=threads)


def partition_result(config: ExperimentConfig, threads=None):
    """Mixed-partition population: half in pairs, a third in triples, a
    sixth in six-groups, all valuations i.i.d. from one template.

    Every group of a given size faces the same optimization problem, so each
    size is optimized once and scaled by its group count (``N`` divisible by
    6 keeps the per-size headcounts integral; group counts may be
    fractional).  Rows report per-group and per-customer revenue next to the
    all-singles baseline.  No optimality claim is made: the best per-group
    bundle offers need not form the best mechanism for the population.
    """
    _require_dists(config, 1)
    dist = config.built[0]
    n_total = config.N
    if n_total is None or n_total % 6 != 0:
        raise ConfigError("partition needs $.N divisible by 6")
    budget = config.budget or 10
    mode = config.mode or "full"
    sol = optimal_single_price(dist)

    columns = ("group_size", "customers", "group_count", "price",
               "per_group_revenue", "per_group_std_error",
               "per_customer_revenue", "class_revenue")
    rows = [(1, n_total, float(n_total), sol.price, sol.utility, 0.0,
             sol.utility, n_total * sol.utility)]

    class_sizes = {2: n_total // 2, 3: n_total // 3, 6: n_total // 6}
    total_mixed = 0.0
    for size, customers in class_sizes.items():
        group_count = customers / size
        if size == 2:
            offer, value = optimize_pair_offer(
                dist, dist, budget, grid_points=16, threads=threads
            )
            err = 0.0
        else:
            offer, _ = optimize_group_offer(
                [dist] * size, mode=mode, budget=budget,
                n_samples=config.n_samples, seed=(config.seed, size),
            )
            # Re-estimate on a held-out stream: the optimizer's own value is
            # biased upward by the maximization over sampling noise.
            value, err = group_expected_revenue_mc(
                [dist] * size, offer, config.n_samples, (config.seed, size, 1)
            )
        total_mixed += group_count * value
        rows.append((size, customers, group_count, offer.bundle_price,
                     value, err, value / size, group_count * value))

    notes = (
        "per-group optima only; the best bundle offers per group need not be "
        "the optimal mechanism for the mixed population",
        f"mixed-partition revenue {total_mixed:.6g} vs all-singles baseline "
        f"{n_total * sol.utility:.6g}",
    )
    return columns, rows, None, notes
