"""Command-line interface.

Subcommands: probability, trajectory, sweep, spectrum, synthesize,
estimate, validate.  Configuration comes from an optional JSON file
(--config) with individual --kebab-case flags overriding file values.
Every output file starts with a metadata header holding the fully
resolved configuration; re-feeding that header as a config reproduces
the identical data section.

Exit codes: 0 success, 2 configuration error, 3 numeric non-convergence,
4 validation-suite failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import metrology, presets
from .config import (
    RunConfig,
    format_number,
    metadata_header,
    parse_config,
    read_config_header,
)
from .errors import (
    BracketFailure,
    CausalityViolation,
    CavityProbeError,
    NonConvergence,
    NonMonotonic,
    SchemaError,
    ValidationError,
)
from .inverse import ObservationSet, fit_perturbation, synthesize_observations

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATE = 4

_NUMERIC_ERRORS = (NonConvergence, BracketFailure, NonMonotonic, CausalityViolation)

PROBABILITY_COLUMNS = (
    "scenario,a,epsilon,gamma,xi0,L,Omega,lambda,alpha,j,"
    "N_used,converged,T_crossing,P,coherent_part,vacuum_part"
)
SWEEP_COLUMNS = "swept_name,swept_value,P_perturbed,P_unperturbed,S,converged"
OBSERVATION_COLUMNS = "setting_name,setting_value,P_observed,sigma"
TRAJECTORY_COLUMNS = "parameter,x,t,tau,speed"


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="path to a JSON config file")
    for flag, key, typ in [
        ("--scenario", "scenario", str),
        ("--a0", "a0", float),
        ("--epsilon", "epsilon", float),
        ("--gamma", "gamma", float),
        ("--xi0", "xi0", float),
        ("--x0", "x0", float),
        ("--t0", "t0", float),
        ("--L", "L", float),
        ("--n-max", "n_max", int),
        ("--n-min", "n_min", int),
        ("--mode-tail-tol", "mode_tail_tol", float),
        ("--Omega", "Omega", float),
        ("--lambda", "lambda", float),
        ("--alpha", "alpha", float),
        ("--j", "j", int),
        ("--quad-tol", "quad_tol", float),
        ("--root-tol", "root_tol", float),
        ("--tau-mode", "tau_mode", str),
        ("--threads", "threads", int),
        ("--seed", "seed", int),
        ("--noise-sigma", "noise_sigma", float),
        ("--budget", "budget", int),
        ("--search-box", "search_box", str),
        ("--output", "output", str),
        ("--format", "format", str),
        ("--preset", "preset", str),
        ("--sweep-parameter", "sweep.parameter", str),
        ("--sweep-min", "sweep.min", float),
        ("--sweep-max", "sweep.max", float),
        ("--sweep-count", "sweep.count", int),
        ("--sweep-spacing", "sweep.spacing", str),
    ]:
        shared.add_argument(flag, dest=key.replace(".", "__"), type=typ, default=None)
    shared.add_argument(
        "--drop-redshift",
        dest="drop_redshift",
        action="store_const",
        const=True,
        default=None,
        help="omit the dtau/dt clock-rate factor from the lab-frame "
        "response integrand (alternative convention; breaks exact "
        "cross-frame agreement)",
    )

    parser = argparse.ArgumentParser(
        prog="cavityprobe",
        description="Unruh-DeWitt probe response through an optical cavity",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("probability", parents=[shared])
    traj = sub.add_parser("trajectory", parents=[shared])
    traj.add_argument("--count", type=int, default=200)
    sub.add_parser("sweep", parents=[shared])
    sub.add_parser("spectrum", parents=[shared])
    sub.add_parser("synthesize", parents=[shared])
    est = sub.add_parser("estimate", parents=[shared])
    est.add_argument("--observations", required=True)
    sub.add_parser("validate", parents=[shared])
    return parser


def _load_config(args) -> RunConfig:
    document = None
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    overrides: dict = {}
    sweep_overrides: dict = {}
    for key, value in vars(args).items():
        if key in ("command", "config", "count", "observations") or value is None:
            continue
        if key.startswith("sweep__"):
            sweep_overrides[key.split("__", 1)[1]] = value
        else:
            overrides[key] = value
    if sweep_overrides:
        base = dict((document or {}).get("sweep", {}))
        base.update(sweep_overrides)
        overrides["sweep"] = base
    return parse_config(document, overrides)


def _emit(lines: list[str], path: str):
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _row(values) -> str:
    return ",".join(
        v if isinstance(v, str) else format_number(v) for v in values
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_probability(cfg: RunConfig, args) -> int:
    from .response import transition_probability

    setup = cfg.setup()
    w = setup.worldline(cfg.epsilon, cfg.gamma)
    r = transition_probability(
        w, setup.detector, setup.cavity, setup.field,
        tol=setup.quad_tol, drop_redshift=setup.drop_redshift,
    )
    T = w.T
    if cfg.format == "json":
        doc = {
            "config": json.loads(cfg.to_json()),
            "P": r.P,
            "coherent_part": r.coherent_part,
            "vacuum_part": r.vacuum_part,
            "N_used": r.N_used,
            "converged": r.converged,
            "T_crossing": T,
            "quad_error_estimate": r.quad_error_estimate,
        }
        _emit([json.dumps(doc, sort_keys=True, indent=2)], cfg.output)
    else:
        lines = metadata_header(cfg, "probability")
        lines.append(PROBABILITY_COLUMNS)
        lines.append(
            _row(
                [
                    cfg.scenario,
                    cfg.a0,
                    cfg.epsilon,
                    cfg.gamma,
                    cfg.xi0,
                    cfg.L,
                    cfg.Omega,
                    cfg.coupling,
                    cfg.alpha,
                    cfg.j,
                    r.N_used,
                    r.converged,
                    T,
                    r.P,
                    r.coherent_part,
                    r.vacuum_part,
                ]
            )
        )
        _emit(lines, cfg.output)
    return EXIT_OK if r.converged else EXIT_NUMERIC


def cmd_trajectory(cfg: RunConfig, args) -> int:
    setup = cfg.setup()
    w = setup.worldline(cfg.epsilon, cfg.gamma)
    u = np.linspace(0.0, w.T, max(args.count, 2))
    x, t, tau, _ = w.kinematics(u)
    v = w.speed(u)
    lines = metadata_header(cfg, "trajectory")
    lines.append(TRAJECTORY_COLUMNS)
    for i in range(len(u)):
        lines.append(_row([u[i], x[i], t[i], tau[i], v[i]]))
    _emit(lines, cfg.output)
    return EXIT_OK


def _sweep_lines(cfg: RunConfig, curve, command: str) -> list[str]:
    lines = metadata_header(cfg, command)
    lines.append(SWEEP_COLUMNS)
    name = "epsilon" if curve.swept_parameter == "amplitude" else "gamma"
    for p in curve.points:
        value = p.epsilon if name == "epsilon" else p.gamma
        if p.error is not None:
            lines.append(f"{name},{format_number(value)},nan,nan,nan,error:{p.error.split(':')[0]}")
        else:
            lines.append(
                _row([name, value, p.P_perturbed, p.P_unperturbed, p.S, p.converged])
            )
    return lines


def cmd_sweep(cfg: RunConfig, args) -> int:
    setup = cfg.setup()
    grid = cfg.sweep.grid()
    if cfg.sweep.parameter == "epsilon":
        if grid.max() > 0 and cfg.gamma <= 0:
            raise ValidationError(
                "an amplitude sweep with epsilon > 0 needs a positive gamma"
            )
        curve = metrology.amplitude_sweep(setup, grid, cfg.gamma, threads=cfg.threads)
    elif cfg.sweep.parameter == "gamma":
        curve = metrology.frequency_spectrum(
            setup, grid, cfg.epsilon, threads=cfg.threads
        )
    else:
        raise ValidationError("sweep supports parameter epsilon or gamma")
    _emit(_sweep_lines(cfg, curve, "sweep"), cfg.output)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, args) -> int:
    name = cfg.preset or (
        "accelerometer-spectrum"
        if cfg.scenario == "proper-frame"
        else "alignment-spectrum"
    )
    preset = presets.SWEEP_PRESETS.get(name)
    if preset is None or "gamma_grid" not in preset:
        raise ValidationError(
            f"unknown spectrum preset {name!r}; choose from "
            f"{sorted(k for k, v in presets.SWEEP_PRESETS.items() if 'gamma_grid' in v)}"
        )
    setup = preset["setup"]()
    curve = metrology.frequency_spectrum(
        setup, np.asarray(preset["gamma_grid"]), preset["epsilon"], threads=cfg.threads
    )
    _emit(_sweep_lines(cfg, curve, f"spectrum --preset {name}"), cfg.output)
    return EXIT_OK


def cmd_synthesize(cfg: RunConfig, args) -> int:
    if cfg.sweep.parameter != "Omega":
        raise ValidationError("synthesize expects a sweep over Omega probe settings")
    obs = synthesize_observations(
        cfg.setup(),
        cfg.epsilon,
        cfg.gamma,
        cfg.sweep.grid(),
        noise_sigma=cfg.noise_sigma,
        rng_seed=cfg.seed,
    )
    lines = metadata_header(cfg, "synthesize")
    lines.append(OBSERVATION_COLUMNS)
    for i, s in enumerate(obs.settings):
        sigma = "" if obs.sigmas is None else format_number(obs.sigmas[i])
        lines.append(
            f"Omega,{format_number(s)},{format_number(obs.probabilities[i])},{sigma}"
        )
    _emit(lines, cfg.output)
    return EXIT_OK


def read_observations(path: str) -> ObservationSet:
    header_cfg = parse_config(read_config_header(path))
    settings, probs, sigmas = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("setting_name"):
                continue
            name, value, p, sigma = line.split(",")
            settings.append(float(value))
            probs.append(float(p))
            sigmas.append(float(sigma) if sigma else None)
    has_sigmas = all(s is not None for s in sigmas) and len(sigmas) > 0
    return ObservationSet(
        setup=header_cfg.setup(),
        settings=tuple(settings),
        probabilities=tuple(probs),
        sigmas=tuple(sigmas) if has_sigmas else None,
    )


def cmd_estimate(cfg: RunConfig, args) -> int:
    obs = read_observations(args.observations)
    box = tuple(tuple(map(float, rng)) for rng in cfg.search_box)
    result = fit_perturbation(obs, search_box=box, budget=cfg.budget)
    doc = {
        "config": json.loads(cfg.to_json()),
        "epsilon_hat": result.epsilon_hat,
        "gamma_hat": result.gamma_hat,
        "a0_hat": result.a0_hat,
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "gamma_identifiable": result.gamma_identifiable,
        "search_box": result.search_box,
    }
    _emit([json.dumps(doc, sort_keys=True, indent=2)], cfg.output)
    return EXIT_OK if result.converged else EXIT_NUMERIC


def cmd_validate(cfg: RunConfig, args) -> int:
    from .validate import run_validation_suite

    failures, lines = run_validation_suite()
    _emit(lines, cfg.output)
    return EXIT_OK if failures == 0 else EXIT_VALIDATE


_COMMANDS = {
    "probability": cmd_probability,
    "trajectory": cmd_trajectory,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "synthesize": cmd_synthesize,
    "estimate": cmd_estimate,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except (SchemaError, ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg, args)
    except (SchemaError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CavityProbeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
