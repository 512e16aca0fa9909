"""
Command-line front end: every computation as a subcommand with JSON or CSV output.

    python -m covertlab scaling --family exponential --lambda 1
    python -m covertlab sweep --family exponential --delta 1 --n-values 256 1024 4096 --seed 7

Machine output goes to stdout (or --out); logs go to stderr. All quantities are
nats unless --bits is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from . import noise_models as nm
from .errors import (
    BlocklengthTooSmallError,
    ConfigError,
    CovertlabError,
    DegenerateNoiseError,
    DivergenceError,
    GammaRangeError,
    NotSynthesizableError,
)
from .input_synthesis import charfn_factorization_residual, synthesize_input
from .key_length import (
    SCHEDULE_GENERAL,
    SCHEDULE_SUB_SQRT,
    key_length_schedule,
    message_nats,
    min_key_nats_for_rho,
    psi,
    resolvability_bound,
    sufficient_key_length,
)
from .reporting.html_builder import build_html
from .reporting.sweep_report_md import generate_sweep_report
from .scaling import scaling_constant
from .settings import (
    DEFAULT_CHI,
    DEFAULT_RATE_FRACTION,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_ZETA,
    SWEEP_CSV_NAME,
    SWEEP_OUTPUT_DIR,
)
from .simulator import run_experiment, sweep
from .tilt import (
    MODE_ACHIEVABILITY,
    MODE_CONVERSE,
    entropy_gap,
    entropy_gap_taylor,
    entropy_tilted,
    gamma_achievability,
    kl_taylor,
    kl_tilted_to_base,
    make_budget,
    make_tilted,
)

logger = logging.getLogger(__name__)

# ----------------------------
# Status codes
# ----------------------------
STATUS_OK = "OK"
STATUS_DOMAIN_ERROR = "DOMAIN_ERROR"
STATUS_DEGENERATE = "DEGENERATE"
STATUS_INFEASIBLE = "INFEASIBLE"
STATUS_CONFIG_ERROR = "CONFIG_ERROR"
STATUS_ERROR = "ERROR"

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_TOOLKIT = 2

DEFAULT_SWEEP_N = [256, 1024, 4096]

NATS_PER_BIT = math.log(2.0)

# display fields converted by --bits, per command
NAT_FIELDS: Dict[str, tuple] = {
    "tilt": ("log_alpha", "kl", "kl_taylor", "entropy_base", "entropy_tilted", "entropy_gap",
             "entropy_gap_taylor", "divergence"),
    "solve-gamma": ("delta", "divergence"),
    "simulate": ("delta_budget", "msg_nats_target", "tau", "threshold", "info_density_mean",
                 "normalized_mean", "normalized_mean_se", "analytic_mutual_info", "covert_divergence"),
    "sweep": ("rate", "covert_div", "idensity_mean"),
    "keylen": ("psi_value", "msg_nats", "key_nats", "resolvability_bound", "target_leak", "bound"),
}

# variances in nats^2, converted by ln(2)^2
NAT_SQUARED_FIELDS: Dict[str, tuple] = {
    "simulate": ("info_density_var", "normalized_var"),
    "sweep": ("idensity_var",),
}

# flag name on the command line -> family parameter
_FAMILY_FLAGS = {
    "sigma": "sigma",
    "lam": "lambda",
    "scale": "scale",
    "p": "p",
    "r": "r",
    "beta": "beta",
    "lo": "lo",
    "hi": "hi",
}

_FAMILY_DEFAULTS = {"sigma": 1.0, "lambda": 1.0, "scale": 1.0, "beta": 1.0, "lo": 0.0, "hi": 1.0}


@dataclass
class RunConfig:
    command: str = ""
    model: Optional[Dict[str, Any]] = None
    delta: Optional[float] = None
    n: Optional[int] = None
    n_values: Optional[List[int]] = None
    gamma: Optional[float] = None
    chi: Optional[float] = None
    rho: Optional[float] = None
    zeta: Optional[float] = None
    mode: Optional[str] = None
    rate_fraction: Optional[float] = None
    target_leak: Optional[float] = None
    schedule: Optional[str] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    format: Optional[str] = None
    bits: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ConfigError(f"RunConfig must be a JSON object, got {type(data).__name__}.")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown RunConfig field(s) {sorted(unknown)}.")
        if data.get("model") is not None:
            nm.model_from_dict(data["model"])
        if data.get("format") not in {None, "json", "csv"}:
            raise ConfigError(f"format must be 'json' or 'csv', got {data['format']!r}.")
        return cls(**dict(data))

    def noise_model(self) -> nm.NoiseModel:
        if self.model is None:
            raise ConfigError("No noise model given; pass --family (and its parameters) or a config with 'model'.")
        return nm.model_from_dict(self.model)

    def require(self, name: str):
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"{self.command}: --{name.replace('_', '-')} is required.")
        return value


def load_config(path: Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    return RunConfig.from_dict(data)


def _model_from_args(args: argparse.Namespace) -> Optional[Dict[str, Any]]:
    given = {param: getattr(args, flag) for flag, param in _FAMILY_FLAGS.items() if getattr(args, flag, None) is not None}
    if args.family is None:
        if given:
            raise ConfigError("Family parameters were given without --family.")
        return None

    family = nm.canonical_family(args.family)
    expected = nm.FAMILY_PARAMS[family]
    stray = sorted(set(given) - set(expected))
    if stray:
        raise ConfigError(f"{family} does not take parameter(s) {stray}.")
    params = {name: given.get(name, _FAMILY_DEFAULTS.get(name)) for name in expected}
    return {"family": family, "params": params}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """--config file first, then every flag given on the command line on top."""
    base = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    merged = base.to_dict()
    merged["command"] = args.command

    model = _model_from_args(args)
    if model is not None:
        merged["model"] = model
    for name in ("delta", "n", "n_values", "gamma", "chi", "rho", "zeta", "mode", "rate_fraction",
                 "target_leak", "schedule", "trials", "seed", "format"):
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    if getattr(args, "bits", False):
        merged["bits"] = True
    return RunConfig.from_dict(merged)


# ----------------------------
# Commands
# ----------------------------

def cmd_scaling(cfg: RunConfig) -> Dict[str, Any]:
    return asdict(scaling_constant(cfg.noise_model()))


def cmd_tilt(cfg: RunConfig) -> Dict[str, Any]:
    model = cfg.noise_model()
    out: Dict[str, Any] = {}
    if cfg.gamma is not None:
        gamma = cfg.gamma
    else:
        budget = make_budget(model, cfg.require("delta"), cfg.require("n"), cfg.mode or MODE_CONVERSE, cfg.chi or DEFAULT_CHI)
        gamma = budget.gamma_n
        out.update(asdict(budget))

    t = make_tilted(model, gamma)
    out.update(
        gamma=gamma,
        alpha=t.alpha,
        log_alpha=t.log_alpha,
        tilted_model=nm.model_to_dict(t.law),
        kl=kl_tilted_to_base(t),
        kl_taylor=kl_taylor(model, gamma),
        entropy_base=nm.differential_entropy(model),
        entropy_tilted=entropy_tilted(t),
        entropy_gap=entropy_gap(t),
        entropy_gap_taylor=entropy_gap_taylor(model, gamma),
    )
    return out


def cmd_solve_gamma(cfg: RunConfig) -> Dict[str, Any]:
    budget = make_budget(
        cfg.noise_model(),
        cfg.require("delta"),
        cfg.require("n"),
        cfg.mode or MODE_CONVERSE,
        cfg.chi or DEFAULT_CHI,
    )
    return asdict(budget)


def cmd_synth_input(cfg: RunConfig) -> Dict[str, Any]:
    model = cfg.noise_model()
    if cfg.gamma is not None:
        gamma = cfg.gamma
    else:
        gamma = gamma_achievability(model, cfg.require("delta"), cfg.require("n"), cfg.chi or DEFAULT_CHI)
    law = synthesize_input(model, gamma)
    out = asdict(law)
    out["charfn_residual"] = charfn_factorization_residual(model, law, gamma)
    return out


def cmd_simulate(cfg: RunConfig) -> Dict[str, Any]:
    report = run_experiment(
        cfg.noise_model(),
        cfg.require("delta"),
        cfg.require("n"),
        cfg.rate_fraction if cfg.rate_fraction is not None else DEFAULT_RATE_FRACTION,
        cfg.trials or DEFAULT_TRIALS,
        cfg.seed if cfg.seed is not None else DEFAULT_SEED,
        chi=cfg.chi or DEFAULT_CHI,
    )
    return asdict(report)


def cmd_sweep(cfg: RunConfig) -> pd.DataFrame:
    return sweep(
        cfg.noise_model(),
        cfg.require("delta"),
        cfg.n_values or DEFAULT_SWEEP_N,
        cfg.rate_fraction if cfg.rate_fraction is not None else DEFAULT_RATE_FRACTION,
        cfg.trials or DEFAULT_TRIALS,
        cfg.seed if cfg.seed is not None else DEFAULT_SEED,
        chi=cfg.chi or DEFAULT_CHI,
    )


def cmd_keylen(cfg: RunConfig):
    model = cfg.noise_model()
    delta = cfg.require("delta")
    target = cfg.target_leak if cfg.target_leak is not None else 1e-3
    schedule = cfg.schedule or SCHEDULE_SUB_SQRT
    chi = cfg.chi or DEFAULT_CHI

    if cfg.n_values:
        return key_length_schedule(model, delta, cfg.n_values, target, schedule, chi=chi)

    n = cfg.require("n")
    if cfg.rho is None:
        return asdict(sufficient_key_length(model, delta, n, target, schedule, chi=chi))

    # single rho: closed-form minimal key at that rho
    rho = cfg.rho
    gamma = gamma_achievability(model, delta, n, chi)
    value = psi(model, gamma, rho, "closed" if schedule == SCHEDULE_SUB_SQRT else "bound")
    msg = message_nats(model, delta, n)
    key = min_key_nats_for_rho(value, msg, n, rho, target)
    return {
        "model": str(model),
        "schedule": schedule,
        "n": n,
        "gamma": gamma,
        "rho": rho,
        "psi_value": value,
        "msg_nats": msg,
        "key_nats": key,
        "resolvability_bound": resolvability_bound(value, key, msg, n, rho),
        "target_leak": target,
        "feasible": math.isfinite(key),
    }


def cmd_check_integrability(cfg: RunConfig) -> Dict[str, Any]:
    report = nm.integrability_check(cfg.noise_model(), cfg.zeta or DEFAULT_ZETA)
    out = asdict(report)
    out["divergent_terms"] = list(report.divergent_terms)
    return out


def cmd_report(args: argparse.Namespace) -> Dict[str, Any]:
    csv_path = Path(args.csv)
    out_dir = Path(args.out_dir) if args.out_dir else csv_path.parent
    md_path = generate_sweep_report(csv_path, out_dir, model=args.model_label, delta=args.delta)
    html_path = build_html(md_path=md_path, out_dir=out_dir, title="Covert Sweep Report")
    return {"markdown": str(md_path), "html": str(html_path)}


COMMANDS = {
    "scaling": cmd_scaling,
    "tilt": cmd_tilt,
    "solve-gamma": cmd_solve_gamma,
    "synth-input": cmd_synth_input,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "keylen": cmd_keylen,
    "check-integrability": cmd_check_integrability,
}

_TABLE_DEFAULT = {"sweep"}


# ----------------------------
# Output
# ----------------------------

def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become "inf" / "-inf" / "nan"."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return jsonable(asdict(value))
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return value


def _to_bits(payload, command: str):
    scales = {name: NATS_PER_BIT for name in NAT_FIELDS.get(command, ())}
    scales.update({name: NATS_PER_BIT**2 for name in NAT_SQUARED_FIELDS.get(command, ())})
    if isinstance(payload, pd.DataFrame):
        frame = payload.copy()
        for name, scale in scales.items():
            if name in frame.columns:
                frame[name] = frame[name] / scale
        return frame
    out = dict(payload)
    for name, scale in scales.items():
        if isinstance(out.get(name), (int, float)) and not isinstance(out.get(name), bool):
            out[name] = out[name] / scale
    return out


def render(payload, command: str, fmt: str, bits: bool = False, status: str = STATUS_OK) -> str:
    if bits:
        payload = _to_bits(payload, command)
    units = "bits" if bits else "nats"

    if fmt == "csv":
        if isinstance(payload, pd.DataFrame):
            frame = payload
        else:
            flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list, tuple))}
            frame = pd.DataFrame([flat])
        return frame.to_csv(index=False, float_format="%.12g", lineterminator="\n")

    if isinstance(payload, pd.DataFrame):
        body: Dict[str, Any] = {"rows": payload.to_dict(orient="records")}
    else:
        body = dict(payload)
    body.update(command=command, status=status, units=units)
    return json.dumps(jsonable(body), indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("Wrote %s", path)
    else:
        sys.stdout.write(text)


def status_for(exc: BaseException) -> str:
    if isinstance(exc, ConfigError):
        return STATUS_CONFIG_ERROR
    if isinstance(exc, DegenerateNoiseError):
        return STATUS_DEGENERATE
    if isinstance(exc, (GammaRangeError, BlocklengthTooSmallError, DivergenceError, NotSynthesizableError)):
        return STATUS_INFEASIBLE
    if isinstance(exc, CovertlabError):
        return STATUS_DOMAIN_ERROR
    return STATUS_ERROR


# ----------------------------
# Parser
# ----------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covertlab", description="Square-root-law toolkit for covert communication.")
    parser.add_argument("--verbose", "-v", action="store_true", help="DEBUG logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="RunConfig JSON; flags override its fields")
    common.add_argument("--family", help="gaussian | exponential | laplace | generalized_gaussian | generalized_gamma | uniform")
    common.add_argument("--sigma", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--scale", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--r", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--lo", type=float)
    common.add_argument("--hi", type=float)
    common.add_argument("--delta", type=float, help="covertness budget, nats")
    common.add_argument("--n", type=int, help="blocklength")
    common.add_argument("--n-values", dest="n_values", type=int, nargs="+")
    common.add_argument("--gamma", type=float)
    common.add_argument("--chi", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--zeta", type=float)
    common.add_argument("--mode", choices=[MODE_CONVERSE, MODE_ACHIEVABILITY])
    common.add_argument("--rate-fraction", dest="rate_fraction", type=float)
    common.add_argument("--target-leak", dest="target_leak", type=float, help="accepts inf")
    common.add_argument("--schedule", choices=[SCHEDULE_SUB_SQRT, SCHEDULE_GENERAL])
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--bits", action="store_true", help="display nat-valued fields in bits")

    for name in COMMANDS:
        sub.add_parser(name, parents=[common])

    report = sub.add_parser("report", help="render a sweep CSV as Markdown + HTML")
    report.add_argument("--csv", default=str(SWEEP_OUTPUT_DIR / SWEEP_CSV_NAME))
    report.add_argument("--out-dir", dest="out_dir")
    report.add_argument("--delta", type=float, help="budget the covert_div column is checked against")
    report.add_argument("--model-label", dest="model_label")
    report.add_argument("--out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )

    try:
        if args.command == "report":
            _emit(render(cmd_report(args), "report", "json"), args.out)
            return EXIT_OK

        cfg = config_from_args(args)
        payload = COMMANDS[args.command](cfg)
        fmt = cfg.format or ("csv" if args.command in _TABLE_DEFAULT else "json")
        infeasible = isinstance(payload, dict) and payload.get("feasible") is False
        status = STATUS_INFEASIBLE if infeasible else STATUS_OK
        _emit(render(payload, args.command, fmt, cfg.bits, status), args.out)
        return EXIT_TOOLKIT if infeasible else EXIT_OK
    except CovertlabError as e:
        sys.stderr.write(json.dumps({"status": status_for(e), "message": str(e)}) + "\n")
        return EXIT_TOOLKIT
    except Exception as e:  # noqa: BLE001
        logger.debug("Unexpected failure", exc_info=True)
        sys.stderr.write(json.dumps({"status": STATUS_ERROR, "message": f"{type(e).__name__}: {e}"}) + "\n")
        return EXIT_UNEXPECTED
