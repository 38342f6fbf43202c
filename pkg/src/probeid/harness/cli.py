"""Command-line entry point: ``probeid <command> [--config PATH] ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

from .. import __version__
from .._rng import derive_seed, make_rng
from ..era import InsufficientData, PrincipalBranchViolation, RankDeficient
from ..estimation import EstimationError, estimate_parameters
from ..identify import NON_IDENTIFIABLE, chain_timing, resource_bounds, test_identifiability
from ..pauli import PauliError, accessible_set
from ..polysys import AlgebraCapExceeded
from ..qsim import TimeSeries, add_noise, simulate_model
from ..statespace import build
from .config import ConfigError, RunConfig, load_config
from .robustness import draw_theta, prior_dt, run_robustness

SCHEMA = "probeid.report/1"
EXIT_OK, EXIT_CONFIG, EXIT_NONIDENTIFIABLE, EXIT_CAP, EXIT_ESTIMATION = 0, 2, 3, 4, 5
_ERA_ERRORS = (RankDeficient, InsufficientData, PrincipalBranchViolation)


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _envelope(command: str, cfg: RunConfig, result) -> dict:
    return {"schema": SCHEMA, "command": command, "version": __version__, "config": cfg.echo(), "result": result}


def _kv_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in rows:
        w.writerow([k, v if isinstance(v, str) else json.dumps(v, sort_keys=True)])
    return buf.getvalue()


def _emit(cfg: RunConfig, name: str, doc: dict, csv_text: str | None) -> None:
    """Write the report (JSON, or CSV when asked and available) to ``out`` or stdout."""
    if cfg.format == "csv" and csv_text is not None:
        text, suffix = csv_text, "csv"
    else:
        text, suffix = json.dumps(doc, indent=2, sort_keys=True) + "\n", "json"
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{suffix}").write_text(text)
    else:
        sys.stdout.write(text)


def _theta(cfg: RunConfig, model) -> dict:
    if cfg.theta:
        return {p: cfg.theta[p] for p in model.parameters()}
    return draw_theta(model.parameters(), make_rng(cfg.seed), cfg.theta_min, cfg.theta_max, cfg.theta_exclude)


def _series_length(cfg: RunConfig, n: int) -> int:
    if cfg.length:
        return cfg.length
    if cfg.hankel_sizes:
        return 2 * max(cfg.hankel_sizes)
    return 2 * n


def _simulate(cfg: RunConfig, model, observables) -> tuple[dict, list[TimeSeries]]:
    theta = _theta(cfg, model)
    n = build(model, observables)[0].n
    dt = prior_dt(cfg, model, observables)
    series = simulate_model(model, theta, dt, _series_length(cfg, n), observables, cfg.probe_sign)
    if cfg.sigma > 0:
        series = [add_noise(ts, cfg.sigma, cfg.shots, derive_seed(cfg.seed, k + 1)) for k, ts in enumerate(series)]
    return theta, series


# commands -------------------------------------------------------------------

def cmd_accessible_set(cfg: RunConfig) -> int:
    model = cfg.model()
    observables = cfg.observable_list(model)
    G = accessible_set(model.terms(), observables)
    result = {
        "observables": [str(o) for o in observables],
        "members": G.to_strings(),
        "generation": list(G.provenance),
        "dim": len(G),
        "model_order": len(G),
    }
    rows = [("dim", len(G)), ("model_order", len(G))] + [(f"member{k}", m) for k, m in enumerate(G.to_strings())]
    _emit(cfg, "accessible_set", _envelope("accessible-set", cfg, result), _kv_csv(rows))
    return EXIT_OK


def cmd_identify(cfg: RunConfig) -> int:
    model = cfg.model()
    observables = cfg.observable_list(model)
    verdict = test_identifiability(model, observables, trials=cfg.trials, seed=cfg.seed, cap=cfg.cap)
    result = {"verdict": verdict.to_json(), "observables": [str(o) for o in observables]}
    result["bounds"] = resource_bounds(model, observables, theta_max=cfg.theta_max, t_dead=cfg.t_dead).to_json()
    rows = [("status", verdict.status), ("cause", verdict.cause or ""), ("sign_recovered", list(verdict.sign_recovered))]
    _emit(cfg, "identify", _envelope("identify", cfg, result), _kv_csv(rows))
    return EXIT_NONIDENTIFIABLE if verdict.status == NON_IDENTIFIABLE else EXIT_OK


def cmd_bounds(cfg: RunConfig) -> int:
    model = cfg.model()
    observables = cfg.observable_list(model)
    rb = resource_bounds(model, observables, theta_max=cfg.theta_max, t_dead=cfg.t_dead)
    result = {"bounds": rb.to_json()}
    if model.is_exchange:
        result["chain_timing"] = [chain_timing(N, cfg.chain_J, cfg.chain_a).to_json() for N in range(2, model.N + 1)]
    rows = sorted(rb.to_json().items())
    if model.is_exchange:
        rows += sorted((f"chain_{k}", v) for k, v in chain_timing(model.N, cfg.chain_J, cfg.chain_a).to_json().items())
    _emit(cfg, "bounds", _envelope("bounds", cfg, result), _kv_csv(rows))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    model = cfg.model()
    observables = cfg.observable_list(model)
    theta, series = _simulate(cfg, model, observables)
    for ts in series:
        ts.meta.update({f"theta.{p}": repr(v) for p, v in theta.items()})
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for ts in series:
            f = out / f"series_{ts.observable}.csv"
            f.write_text(ts.to_csv())
            files.append(f.name)
        result = {"theta": theta, "files": files, "dt": series[0].dt, "length": len(series[0])}
        _emit(cfg, "simulate", _envelope("simulate", cfg, result), None)
    else:
        if len(series) > 1:
            raise ConfigError("several observables: give --out to write one CSV per series")
        sys.stdout.write(series[0].to_csv())
    return EXIT_OK


def _read_series(paths) -> list[TimeSeries]:
    out = []
    for p in paths:
        try:
            out.append(TimeSeries.from_csv(Path(p).read_text()))
        except OSError as e:
            raise ConfigError(f"cannot read {p}: {e.strerror}") from None
        except ValueError as e:
            raise ConfigError(f"{p}: {e}") from None
    return out


def cmd_estimate(cfg: RunConfig) -> int:
    model = cfg.model()
    observables = cfg.observable_list(model)
    if cfg.inputs:
        series = _read_series(cfg.inputs)
        theta = {p: cfg.theta[p] for p in model.parameters()} if cfg.theta else None
        recorded = series[0].meta
        if theta is None and all(f"theta.{p}" in recorded for p in model.parameters()):
            theta = {p: float(recorded[f"theta.{p}"]) for p in model.parameters()}
        if len(series) != len(observables):
            if cfg.observables.strip():
                raise ConfigError(f"{len(series)} input series for {len(observables)} observables")
            observables = model.default_observables(two=len(series) == 2 and model.family == "ExchangeTransverse")
    else:
        theta, series = _simulate(cfg, model, observables)
    size = cfg.hankel_sizes[0] if cfg.hankel_sizes else None
    try:
        rep = estimate_parameters(
            model, series, observables, hankel_size=size, truth=theta, threshold=cfg.threshold, solver=cfg.solver, cap=cfg.cap,
        )
    except (EstimationError,) + _ERA_ERRORS as e:
        raise _Failure(EXIT_ESTIMATION, f"{type(e).__name__}: {e}") from None
    doc = rep.to_json()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "magnitude", "signed", "truth", "epsilon_percent"])
    for p in rep.parameters:
        w.writerow([
            p, repr(rep.magnitudes[p]),
            repr(rep.signed[p]) if p in rep.signed else "",
            repr(rep.truth[p]) if rep.truth else "",
            repr(rep.epsilon_percent[p]) if rep.epsilon_percent else "",
        ])
    _emit(cfg, "estimate", _envelope("estimate", cfg, doc), buf.getvalue())
    return EXIT_OK


def cmd_robustness(cfg: RunConfig) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        summary = run_robustness(cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    doc = _envelope("robustness", cfg, summary.to_json())
    text = summary.to_csv()
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "robustness.csv").write_text(text)
        (out / "robustness.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text if cfg.format == "csv" else json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {
    "accessible-set": cmd_accessible_set,
    "identify": cmd_identify,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "robustness": cmd_robustness,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="probeid", description="Identify and estimate spin-chain Hamiltonians from a single probe qubit.")
    ap.add_argument("--version", action="version", version=f"probeid {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides run.seed)")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--workers", type=int, help="worker processes for robustness")
    common.add_argument("--format", choices=("json", "csv"), help="report format")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def configure(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    for attr in ("seed", "out", "workers", "format"):
        v = getattr(args, attr)
        if v is not None:
            setattr(cfg, attr, v)
    return cfg.validate()


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    try:
        cfg = configure(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PauliError as e:
        print(f"config error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AlgebraCapExceeded as e:
        print(f"algebra cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except _Failure as e:
        print(f"estimation failed: {e}", file=sys.stderr)
        return e.code
    except (EstimationError,) + _ERA_ERRORS as e:
        print(f"estimation failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ESTIMATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
