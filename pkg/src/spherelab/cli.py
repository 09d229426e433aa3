"""Reproducible experiment runner.

    spherelab run <study> [--config FILE] [--seed N] [--out DIR]
                  [--format csv|json] [--plot]

Config files are flat ``key = value`` text with ``#`` comments; unknown keys
are rejected, every field is validated before anything runs, and the seed is
echoed into the output.  Exit codes: 0 ok, 2 config error, 3 numerical
invariant violated, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import experiments
from .errors import BudgetExceededError, ConfigError, NumericalInvariantError
from .report import ReportDocument, emit_report, plot_svg

__all__ = ["ExperimentConfig", "parse_config_file", "run_study", "main", "STUDIES"]


def _parse_int_list(text):
    vals = [int(x) for x in str(text).replace(" ", "").split(",") if x != ""]
    return vals


def _parse_float_list(text):
    out = []
    for x in str(text).replace(" ", "").split(","):
        if x == "":
            continue
        out.append(math.inf if x in ("inf", "oo") else float(x))
    return out


def _positive_ints(name):
    def check(vals):
        if not vals:
            raise ConfigError("degree grid spec is empty", field=name)
        if any(v < 0 for v in vals):
            raise ConfigError("degrees must be >= 0", field=name)
        return vals
    return check


def _at_least(name, minimum):
    def check(val):
        vals = val if isinstance(val, list) else [val]
        if not vals:
            raise ConfigError("value list is empty", field=name)
        if any(v < minimum for v in vals):
            raise ConfigError(f"values must be >= {minimum}", field=name)
        return val
    return check


@dataclass
class FieldSpec:
    parse: callable
    default: object
    check: callable = lambda v: v


def _identity_schema():
    return {
        "seed": FieldSpec(int, 0),
    }


def _study_schemas():
    def dim_check(v):
        if v not in (2, 3, 4, 5):
            raise ConfigError(f"dimension must be in 2..5, got {v}", field="dimension")
        return v

    schemas = {
        "bilinear-sharpness-s2": {
            "n_values": FieldSpec(_parse_int_list, [8, 16, 32, 64, 128, 256, 512],
                                  _positive_ints("n_values")),
            "m_factor": FieldSpec(int, 8, _at_least("m_factor", 1)),
            "lebesgue_r": FieldSpec(float, 2.0, _at_least("lebesgue_r", 1)),
        },
        "frequency-disappearance": {
            "n_fixed": FieldSpec(int, 16, _at_least("n_fixed", 1)),
            "m_values": FieldSpec(_parse_int_list, [256, 512, 1024],
                                  _positive_ints("m_values")),
        },
        "zonal-sharpness": {
            "dimension": FieldSpec(int, 4, dim_check),
            "p_values": FieldSpec(_parse_int_list, [8, 16, 32, 64, 128, 256],
                                  _positive_ints("p_values")),
        },
        "trilinear-s2": {
            "n_values": FieldSpec(_parse_int_list, [8, 16, 32, 64, 128],
                                  _positive_ints("n_values")),
            "m_values": FieldSpec(_parse_int_list, [8, 16, 32, 64, 128],
                                  _positive_ints("m_values")),
            "k_factor": FieldSpec(int, 8, _at_least("k_factor", 1)),
        },
        "critical-exponent": {
            "n_fixed": FieldSpec(int, 2, _at_least("n_fixed", 1)),
            "m_values": FieldSpec(_parse_int_list, [32, 64, 128, 256],
                                  _positive_ints("m_values")),
            "r_values": FieldSpec(_parse_float_list, [2.0, 4.0],
                                  _at_least("r_values", 2)),
        },
        "best-constant": {
            "p_values": FieldSpec(_parse_int_list, [4, 8, 16, 32],
                                  _positive_ints("p_values")),
            "starts": FieldSpec(int, 8, _at_least("starts", 0)),
            "tol": FieldSpec(float, 1e-10, _at_least("tol", 0)),
            "max_iters": FieldSpec(int, 500, _at_least("max_iters", 1)),
            "n_random_pairs": FieldSpec(int, 64, _at_least("n_random_pairs", 0)),
        },
        "windowed-projector": {
            "centers": FieldSpec(_parse_float_list, [32.0, 64.0, 128.0],
                                 _at_least("centers", 1)),
            "n_draws": FieldSpec(int, 64, _at_least("n_draws", 1)),
        },
    }
    for schema in schemas.values():
        schema.update(_identity_schema())
    return schemas


STUDIES = {
    "bilinear-sharpness-s2": experiments.study_bilinear_sharpness,
    "frequency-disappearance": experiments.study_frequency_disappearance,
    "zonal-sharpness": experiments.study_zonal_sharpness,
    "trilinear-s2": experiments.study_trilinear,
    "critical-exponent": experiments.study_critical_exponent,
    "best-constant": experiments.study_best_constant,
    "windowed-projector": experiments.study_windowed_projector,
}

_SCHEMAS = _study_schemas()

_RUNNER_KWARGS = {
    "bilinear-sharpness-s2": ("n_values", "m_factor", "lebesgue_r", "seed"),
    "frequency-disappearance": ("n_fixed", "m_values", "seed"),
    "zonal-sharpness": ("dimension", "p_values", "seed"),
    "trilinear-s2": ("n_values", "m_values", "k_factor", "seed"),
    "critical-exponent": ("n_fixed", "m_values", "r_values", "seed"),
    "best-constant": ("p_values", "starts", "tol", "max_iters", "seed", "n_random_pairs"),
    "windowed-projector": ("centers", "n_draws", "seed"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated study configuration."""

    study: str
    params: dict = field(default_factory=dict)


def parse_config_file(path):
    """Read a flat key = value config file; returns {key: (value, line_no)}."""
    out = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw!r}", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in out:
            raise ConfigError(f"duplicate key '{key}'", field=key, line=lineno)
        out[key] = (value, lineno)
    return out


def build_config(study, raw_entries=None, seed_override=None):
    """Validate raw config text against the study schema."""
    if study not in STUDIES:
        raise ConfigError(
            f"unknown study '{study}'; available: {', '.join(sorted(STUDIES))}",
            field="study")
    schema = _SCHEMAS[study]
    params = {}
    raw_entries = dict(raw_entries or {})
    raw_entries.pop("study", None)
    for key, (value, lineno) in raw_entries.items():
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' for study '{study}'",
                              field=key, line=lineno)
        spec = schema[key]
        try:
            parsed = spec.parse(value)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse '{value}': {exc}", field=key,
                              line=lineno) from exc
        params[key] = spec.check(parsed)
    for key, spec in schema.items():
        if key not in params:
            params[key] = spec.check(spec.parse(spec.default)
                                     if isinstance(spec.default, str) else spec.default)
    if seed_override is not None:
        params["seed"] = int(seed_override)
    return ExperimentConfig(study=study, params=params)


def run_study(config):
    """Execute a validated config and assemble the ReportDocument."""
    runner = STUDIES[config.study]
    kwargs = {k: config.params[k] for k in _RUNNER_KWARGS[config.study]}
    start = time.perf_counter()
    outcome = runner(**kwargs)
    elapsed = time.perf_counter() - start
    for grid in outcome.grids:
        for s in grid.samples:
            if not (math.isfinite(s.ratio) and s.ratio >= 0 and s.bound > 0):
                raise NumericalInvariantError(
                    f"sample (p={s.p}, q={s.q}) has ratio={s.ratio}, bound={s.bound}")
    stamp = datetime.now(timezone.utc).isoformat()
    for grid in outcome.grids:
        grid.timestamp = stamp
    meta = {
        "seed": config.params.get("seed", 0),
        "timestamp": stamp,
        "runtime_seconds": elapsed,
        "sample_count": sum(len(g.samples) for g in outcome.grids),
    }
    config_echo = {k: (None if v == math.inf else v) for k, v in
                   _jsonable_params(config.params).items()}
    return ReportDocument(study=config.study, config=config_echo,
                          grids=outcome.grids, fits=outcome.fits,
                          constants=outcome.constants, meta=meta)


def _jsonable_params(params):
    out = {}
    for k, v in params.items():
        if isinstance(v, list):
            out[k] = [None if x == math.inf else x for x in v]
        else:
            out[k] = v
    return out


def _summary_lines(doc):
    lines = [f"study {doc.study}: {doc.meta['sample_count']} samples,"
             f" seed {doc.meta['seed']}, {doc.meta['runtime_seconds']:.2f}s"]
    for name, fit in doc.fits.items():
        lines.append(f"  fit {name}: exponent {fit.exponent:.4f}"
                     f" (r^2 {fit.r_squared:.6f})")
    for name, val in doc.constants.items():
        lines.append(f"  constant {name}: {val:.6g}")
    return lines


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="spherelab",
        description="measure product norms of sphere eigenfunctions against growth bounds")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a named study")
    run_p.add_argument("study", help=f"one of: {', '.join(sorted(STUDIES))}")
    run_p.add_argument("--config", default=None, help="flat key=value config file")
    run_p.add_argument("--seed", type=int, default=None, help="override the seed (default 0)")
    run_p.add_argument("--out", default=".", help="output directory")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")
    run_p.add_argument("--plot", action="store_true", help="also render the SVG figure")
    args = parser.parse_args(argv)

    try:
        raw = parse_config_file(args.config) if args.config else {}
        if "study" in raw and raw["study"][0] != args.study:
            raise ConfigError(
                f"config file names study '{raw['study'][0]}' but"
                f" '{args.study}' was requested", field="study")
        config = build_config(args.study, raw, seed_override=args.seed)
        doc = run_study(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalInvariantError as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return 3
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 4

    try:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        suffix = "csv" if args.format == "csv" else "json"
        out_path = out_dir / f"{args.study}.{suffix}"
        out_path.write_bytes(emit_report(doc, args.format))
        written = [str(out_path)]
        if args.plot:
            svg_path = out_dir / f"{args.study}.svg"
            svg_path.write_bytes(plot_svg(doc))
            written.append(str(svg_path))
    except OSError as exc:
        print(f"config error: cannot write output: {exc}", file=sys.stderr)
        return 2
    for line in _summary_lines(doc):
        print(line)
    print("wrote " + ", ".join(written))
    return 0


if __name__ == "__main__":
    sys.exit(main())
