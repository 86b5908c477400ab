"""Command-line entry point: ``stateamp {region,validate,point,oracle-dump}``.

Options can come from a flat ``key = value`` config file (``--config``) and
be overridden on the command line.  Config keys are the long flag names
without dashes, e.g. ``sigma-u2 = 1`` or ``beta-grid = 512``.

Exit codes: 0 ok, 1 validation failure, 2 usage error, 3 internal
consistency violation (an achievable point below the converse bound).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import inner_bound as ib
from . import oracle, validation
from .model import LOG_BASE, ChannelParams, convert_rate, derive
from .region import ContainmentError, RegionConfig, build_region
from .svgplot import line_plot

FORMATS = ("csv", "svg", "json")

DEFAULTS = {
    "p": 7.7,
    "q": 10.0,
    "n": 1.0,
    "sigma-u2": 1.0,
    "beta-grid": 512,
    "rate-levels": 400,
    "nbar-grid": 1024,
    "r-samples": 400,
    "oracle-n": 10**6,
    "oracle-draws": 200,
    "random-channels": 20,
    "brute-points": 10**4,
    "seed": 0,
    "out": ".",
    "format": "csv,svg,json",
    "convexify": False,
    "log-base": "2",
    "alpha": None,
    "beta": None,
    "max-rows": None,
}

HELP = {
    "p": "transmit power P",
    "q": "state variance Q",
    "n": "channel noise variance N",
    "sigma-u2": "state observation noise variance",
    "beta-grid": "number of power-split values beta in [0, 1]",
    "rate-levels": "target rates per beta when optimising alpha",
    "nbar-grid": "noise-partition grid size for the first outer bound",
    "r-samples": "rate samples for the outer curves",
    "oracle-n": "Monte Carlo samples per oracle draw",
    "oracle-draws": "random (channel, alpha, beta) draws checked by validate",
    "random-channels": "random channels in the containment check",
    "brute-points": "brute-force grid size for the envelope check",
    "seed": "seed for every random draw",
    "out": "output directory",
    "format": "comma-separated subset of csv,svg,json",
    "convexify": "replace the inner frontier by its time-sharing hull",
    "log-base": "log base for reported rates: 2, e or a number > 1",
    "alpha": "Gelfand-Pinsker coefficient (point, oracle-dump)",
    "beta": "power fraction for the digital part (point, oracle-dump)",
    "max-rows": "row cap for oracle-dump",
}

INT_KEYS = {"beta-grid", "rate-levels", "nbar-grid", "r-samples", "oracle-n", "oracle-draws",
            "random-channels", "brute-points", "seed", "max-rows"}
FLOAT_KEYS = {"p", "q", "n", "sigma-u2", "alpha", "beta"}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelParams
    region: RegionConfig
    oracle_n: int
    oracle_draws: int
    random_channels: int
    brute_points: int
    seed: int
    out: str
    formats: tuple
    log_base: float
    options: dict = field(default_factory=dict)

    @property
    def rate_unit(self) -> str:
        if self.log_base == 2.0:
            return "bits"
        if self.log_base == math.e:
            return "nats"
        return f"base{self.log_base:g}"


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("_", "-").lower()
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _coerce(key, value):
    if value is None or isinstance(value, bool):
        return value
    try:
        if key in INT_KEYS:
            if isinstance(value, str) and not value.strip():
                raise ValueError("empty")
            f = float(value)
            if f != int(f):
                raise ValueError("not an integer")
            return int(f)
        if key in FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid value for {key}: {value!r} ({exc})") from None
    if key == "convexify" and isinstance(value, str):
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off", ""):
            return False
        raise UsageError(f"invalid value for convexify: {value!r}")
    return value


def parse_log_base(text) -> float:
    t = str(text).strip().lower()
    if t == "e":
        return math.e
    try:
        b = float(t)
    except ValueError:
        raise UsageError(f"invalid log base {text!r}") from None
    if not b > 1.0 or not math.isfinite(b):
        raise UsageError(f"log base must exceed 1, got {text!r}")
    return b


def merge_options(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None and val is not False:
            opts[key] = val
    return {k: _coerce(k, v) for k, v in opts.items()}


def build_run_config(opts: dict) -> RunConfig:
    for key in ("beta-grid", "rate-levels", "nbar-grid", "r-samples"):
        if opts[key] < 2:
            raise UsageError(f"{key} must be >= 2 (got {opts[key]})")
    for key in ("oracle-n", "oracle-draws", "brute-points"):
        if opts[key] < 2:
            raise UsageError(f"{key} must be >= 2 (got {opts[key]})")
    if opts["random-channels"] < 0:
        raise UsageError("random-channels must be >= 0")
    formats = tuple(f.strip().lower() for f in str(opts["format"]).split(",") if f.strip())
    if not formats or any(f not in FORMATS for f in formats):
        raise UsageError(f"format must be a comma-separated subset of {','.join(FORMATS)}")
    try:
        channel = ChannelParams(P=opts["p"], Q=opts["q"], N=opts["n"], sigma_u2=opts["sigma-u2"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    region = RegionConfig(
        beta_points=opts["beta-grid"],
        rate_levels=opts["rate-levels"],
        r_samples=opts["r-samples"],
        nbar_points=opts["nbar-grid"],
        convexify=bool(opts["convexify"]),
        seed=opts["seed"],
    )
    return RunConfig(
        channel=channel,
        region=region,
        oracle_n=opts["oracle-n"],
        oracle_draws=opts["oracle-draws"],
        random_channels=opts["random-channels"],
        brute_points=opts["brute-points"],
        seed=opts["seed"],
        out=str(opts["out"]),
        formats=formats,
        log_base=parse_log_base(opts["log-base"]),
        options=opts,
    )


def provenance(cfg: RunConfig) -> str:
    keys = ("p", "q", "n", "sigma-u2", "beta-grid", "rate-levels", "nbar-grid", "r-samples",
            "convexify", "log-base", "seed")
    return " ".join(f"{k}={cfg.options[k]}" for k in keys)


def _g12(x) -> str:
    x = float(x)
    return f"{x:.12g}" if math.isfinite(x) else "nan"


def write_region_csv(path, report, cfg: RunConfig) -> None:
    factor = float(convert_rate(1.0, cfg.log_base))
    with open(path, "w", newline="") as fh:
        fh.write(f"# stateamp region {provenance(cfg)}\n")
        fh.write(f"# regime={report.regime} seed={cfg.seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"R_{cfg.rate_unit}", "D_inner", "D_outer2", "D_outer3", "D_combined"])
        for row in zip(report.rates * factor, report.d_inner, report.d_outer2, report.d_outer3,
                       report.d_combined):
            w.writerow([_g12(v) for v in row])


def read_region_csv(path) -> dict:
    """Parse a region.csv back into float arrays keyed by column name."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    cols = {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}
    return cols


def _scale_rates(obj, factor):
    if isinstance(obj, dict):
        return {k: (_scale_rates(v, factor) if k not in ("R", "rate_limit") else _mul(v, factor))
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [_scale_rates(v, factor) for v in obj]
    return obj


def _mul(v, factor):
    if isinstance(v, list):
        return [None if x is None else x * factor for x in v]
    return None if v is None else v * factor


def report_json(report, cfg: RunConfig) -> str:
    factor = float(convert_rate(1.0, cfg.log_base))
    d = report.to_dict()
    if factor != 1.0:
        d = _scale_rates(d, factor)
    d["rate_unit"] = cfg.rate_unit
    d["metadata"] = dict(d["metadata"], provenance=provenance(cfg), rng=oracle.RNG_ALGORITHM)
    return json.dumps(d, indent=1, sort_keys=True) + "\n"


def region_svg(report, cfg: RunConfig) -> str:
    factor = float(convert_rate(1.0, cfg.log_base))
    inner_r = [p.rate * factor for p in report.inner]
    inner_d = [p.distortion for p in report.inner]
    series = [
        ("Inner bound (analog + Gelfand-Pinsker)", inner_r, inner_d),
        ("Outer bound: noise partition", list(report.outer2.rates * factor), list(report.outer2.dists)),
        ("Outer bound: correlation", list(report.outer3.rates * factor), list(report.outer3.dists)),
        ("Outer bound: combined", list(report.combined.rates * factor), list(report.combined.dists)),
    ]
    cp = cfg.channel
    title = f"P={cp.P:g}, Q={cp.Q:g}, N={cp.N:g}, sigma_u^2={cp.sigma_u2:g}"
    return line_plot(series, f"R [{cfg.rate_unit}/use]", "D", title=title,
                     comment=f"stateamp region {provenance(cfg)}")


def cmd_region(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    os.makedirs(cfg.out, exist_ok=True)
    report = build_region(cfg.channel, cfg.region)
    written = []
    if "csv" in cfg.formats:
        path = os.path.join(cfg.out, "region.csv")
        write_region_csv(path, report, cfg)
        written.append(path)
    if "svg" in cfg.formats:
        path = os.path.join(cfg.out, "region.svg")
        with open(path, "w") as fh:
            fh.write(region_svg(report, cfg))
        written.append(path)
    if "json" in cfg.formats:
        path = os.path.join(cfg.out, "report.json")
        with open(path, "w") as fh:
            fh.write(report_json(report, cfg))
        written.append(path)
    print(f"regime: {report.regime}", file=stdout)
    for path in written:
        print(f"wrote {path}", file=stdout)
    return 0


def point_summary(cfg: RunConfig, alpha: float, beta: float) -> dict:
    cp = cfg.channel
    dp = derive(cp)
    ip = ib.InnerParams(alpha=alpha, beta=beta)
    pt = ib.evaluate(dp, cp, ip)
    st = ib.scheme_statistics(dp, cp, ip)
    factor = float(convert_rate(1.0, cfg.log_base))
    return {
        "alpha": alpha,
        "beta": beta,
        "R": pt.rate * factor,
        "R_raw": pt.raw_rate * factor,
        "D": pt.distortion,
        "g": pt.g,
        "r": [float(x) for x in st.r],
        "Sigma": [[float(x) for x in row] for row in st.Sigma],
        "costa_alpha": ib.costa_alpha(cp, beta),
        "u_useless_alpha": ib.u_useless_alpha(dp, cp, beta),
        "decodable": pt.decodable,
        "degenerate": pt.degenerate,
        "Qp": dp.Qp,
        "Np": dp.Np,
        "rate_unit": cfg.rate_unit,
    }


def cmd_point(cfg: RunConfig, alpha: float, beta: float, as_json: bool = False, stdout=None) -> int:
    stdout = stdout or sys.stdout
    info = point_summary(cfg, alpha, beta)
    if as_json:
        stdout.write(json.dumps(info, indent=1, sort_keys=True) + "\n")
        return 0
    width = max(len(k) for k in info)
    for k, v in info.items():
        if isinstance(v, float):
            v = f"{v:.12g}"
        elif v is None:
            v = "none"
        print(f"{k:<{width}}  {v}", file=stdout)
    if info["degenerate"]:
        print("note: beta = alpha = 0 leaves U identically zero; D uses Y alone", file=stdout)
    return 0


def cmd_validate(cfg: RunConfig, distortion_scale: float = 1.0, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    vcfg = validation.ValidationConfig(
        oracle_draws=cfg.oracle_draws,
        oracle_n=cfg.oracle_n,
        seed=cfg.seed,
        random_channels=cfg.random_channels,
        frontier=cfg.region.frontier_config,
        nbar_points=cfg.region.nbar_points,
        brute_points=cfg.brute_points,
        distortion_scale=distortion_scale,
    )
    results = validation.run_all(vcfg)
    for r in results:
        print(r.line(), file=stderr)
    ok = all(r.passed for r in results)
    doc = {
        "passed": ok,
        "checks": [r.to_dict() for r in results],
        "config": {k.replace("_", "-"): v for k, v in asdict(vcfg).items() if k != "frontier"},
        "rng": oracle.RNG_ALGORITHM,
    }
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    stdout.write(text)
    if "json" in cfg.formats and cfg.out not in ("", "-"):
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "validate.json"), "w") as fh:
            fh.write(text)
    return 0 if ok else 1


def cmd_oracle_dump(cfg: RunConfig, alpha: float, beta: float, max_rows=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    cp = cfg.channel
    dp = derive(cp)
    batch = oracle.sample(dp, cp, ib.InnerParams(alpha, beta), cfg.oracle_n, cfg.seed)
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "batch.csv")
    oracle.write_batch_csv(batch, path, max_rows=max_rows)
    print(f"wrote {path}", file=stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stateamp",
        description="Bounds on the rate / state-distortion region of Gaussian state amplification "
                    "with noisy state observations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, extra=()):
        p.add_argument("--config", help="flat key = value config file; flags override it")
        keys = ["p", "q", "n", "sigma-u2", "beta-grid", "rate-levels", "nbar-grid", "r-samples",
                "oracle-n", "seed", "out", "format", "log-base", *extra]
        for key in keys:
            default = DEFAULTS[key]
            p.add_argument(f"--{key}", default=None, help=f"{HELP[key]} (default: {default})")
        p.add_argument("--convexify", action="store_true", default=None, help=HELP["convexify"])

    p_region = sub.add_parser("region", help="compute all bounds and write region.csv/svg and report.json")
    common(p_region)

    p_val = sub.add_parser("validate", help="run the oracle and invariant checks")
    common(p_val, ("oracle-draws", "random-channels", "brute-points"))
    p_val.add_argument("--perturb-distortion", type=float, default=1.0, help=argparse.SUPPRESS)

    p_point = sub.add_parser("point", help="evaluate one (alpha, beta) choice")
    common(p_point, ("alpha", "beta"))
    p_point.add_argument("--json", action="store_true", help="print JSON instead of aligned text")

    p_dump = sub.add_parser("oracle-dump", help="write a Monte Carlo sample batch as CSV")
    common(p_dump, ("alpha", "beta", "max-rows"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = merge_options(args)
        cfg = build_run_config(opts)
        if args.command in ("point", "oracle-dump"):
            alpha, beta = opts["alpha"], opts["beta"]
            if alpha is None or beta is None:
                raise UsageError("--alpha and --beta are required")
            if not (alpha >= 0.0 and math.isfinite(alpha)):
                raise UsageError(f"alpha must be >= 0, got {alpha}")
            if not 0.0 <= beta <= 1.0:
                raise UsageError(f"beta must lie in [0, 1], got {beta}")
    except (UsageError, OSError) as exc:
        parser.error(str(exc))

    try:
        if args.command == "region":
            return cmd_region(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, distortion_scale=args.perturb_distortion)
        if args.command == "point":
            return cmd_point(cfg, alpha, beta, as_json=args.json)
        return cmd_oracle_dump(cfg, alpha, beta, max_rows=opts["max-rows"])
    except ContainmentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
