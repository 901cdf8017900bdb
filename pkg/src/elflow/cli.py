"""``elflow`` command line: coefficient tools, identity checks and the simulator.

Exit codes: 0 success, 1 failed check or inadmissible coefficients, 2 usage,
parse or configuration error, 3 simulation stopped by an instability.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__, coefficients, diagnostics, doi_onsager, fields, solver, verify
from .config import config_to_text, load_config
from .errors import CoefficientParseError, ConfigError, ElflowError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNSTABLE = 0, 1, 2, 3

log = logging.getLogger("elflow")


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors through the return code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


@dataclass
class RunManifest:
    config_path: str
    config: str
    version: str
    seed: int
    started: str
    finished: str = ""
    termination: str = ""
    steps_taken: int = 0
    outputs: list[str] = field(default_factory=list)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=2)
            fh.write("\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# check-coeffs ----------------------------------------------------------------

def cmd_check_coeffs(args) -> int:
    try:
        with open(args.coeffs) as fh:
            alpha, nu = coefficients.parse_coefficients(fh.read())
    except OSError as exc:
        print(f"error: cannot read {args.coeffs}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except CoefficientParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    parodi = coefficients.check_parodi(alpha, args.tol)
    print(f"alpha       = {alpha.as_tuple()}")
    print(f"parodi      residual={parodi.residual:.3e}  {'holds' if parodi.holds else 'VIOLATED'}")
    try:
        co = coefficients.derive(alpha, nu)
    except ValueError as exc:
        print(f"derived     unavailable: {exc}")
        return EXIT_FAIL
    print(f"gamma1={co.gamma1!r}  gamma2={co.gamma2!r}  mu1={co.mu1!r}  mu2={co.mu2!r}")
    print(f"beta        = ({co.beta1!r}, {co.beta2!r}, {co.beta3!r})")
    m1, m2, m3 = coefficients.admissibility_margins(co.beta)
    admissible = coefficients.is_admissible(co.beta)
    print(f"margins     beta2={m1!r}  2*beta2+beta3={m2!r}  1.5*beta2+beta3+beta1={m3!r}")
    print(f"admissible  {'yes' if admissible else 'no'}")
    if args.oracle:
        low = coefficients.min_dissipation_oracle(co.beta, args.samples, args.seed)
        print(f"oracle      min over {args.samples} samples (seed {args.seed}) = {low:.6e}")
    return EXIT_OK if admissible and parodi.holds else EXIT_FAIL


# gen-coeffs ------------------------------------------------------------------

def cmd_gen_coeffs(args) -> int:
    try:
        params = doi_onsager.MaierSaupeParams(args.eta1, args.lam)
        alpha = doi_onsager.generate(params, args.nodes)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    op = doi_onsager.order_parameters(args.eta1, args.nodes)
    sys.stdout.write(f"# Maier-Saupe closure eta1={args.eta1!r} lambda={args.lam!r} "
                     f"nodes={args.nodes} S2={op.S2!r} S4={op.S4!r}\n")
    sys.stdout.write(coefficients.format_coefficients(alpha))
    return EXIT_OK


# verify-identities -------------------------------------------------------------

def cmd_verify_identities(args) -> int:
    if args.samples < 1:
        print("error: --samples must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    checks = verify.run_all(args.samples, args.seed)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print("all identities hold" if ok else "identity violation detected")
    return EXIT_OK if ok else EXIT_FAIL


# simulate ----------------------------------------------------------------------

def _snapshot_values(grid, state):
    return np.concatenate([state.velocity(grid), state.n])


def cmd_simulate(args) -> int:
    try:
        cfg, options = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = args.output_dir or os.path.join(os.path.dirname(os.path.abspath(args.config)),
                                              "output")
    os.makedirs(out_dir, exist_ok=True)
    grid = cfg.grid
    manifest = RunManifest(config_path=os.path.abspath(args.config),
                           config=config_to_text(cfg, options),
                           version=__version__, seed=cfg.initial.seed, started=_now())
    log.info("seed %d, %d steps of %.6g", cfg.initial.seed, cfg.n_steps, cfg.step_size)

    def snap(step, state):
        name = f"snapshot_{step:07d}.elf"
        fields.write_snapshot(os.path.join(out_dir, name), grid, state.t,
                              _snapshot_values(grid, state))
        manifest.outputs.append(name)

    every = options.snapshot_every
    last = {"step": -1}

    def on_output(step, state, report):
        if step == 0 or (every and step % every == 0):
            snap(step, state)
            last["step"] = step
        last["state"], last["at"] = state, step

    try:
        traj = solver.simulate(cfg, on_output=on_output, keep_snapshots=False)
    except ElflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if last.get("at", -1) != last["step"]:
        snap(last["at"], last["state"])
    diagnostics.write_csv(os.path.join(out_dir, "diagnostics.csv"), traj.reports)
    manifest.outputs.append("diagnostics.csv")
    manifest.finished = _now()
    manifest.termination = traj.termination
    manifest.steps_taken = traj.steps_taken
    manifest.write(os.path.join(out_dir, "manifest.json"))
    print(f"{traj.termination}: {traj.steps_taken} steps, {len(traj.reports)} diagnostic rows "
          f"written to {out_dir}")
    return EXIT_OK if traj.completed else EXIT_UNSTABLE


# energy-report ------------------------------------------------------------------

def cmd_energy_report(args) -> int:
    try:
        reports = diagnostics.read_csv(args.csv)
    except OSError as exc:
        print(f"error: cannot read {args.csv}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    E = np.array([r.E for r in reports])
    max_resid = max(r.residual for r in reports)
    rows = len(reports)
    print(f"rows                  {rows}")
    print(f"max residual          {max_resid:.6e}")
    if rows > 1:
        rise = float(np.max(np.diff(E)))
        verdict = diagnostics.small_data_monitor(reports, args.tol)
        print(f"max energy increase   {rise:.6e}")
        print(f"Es monotone           {'yes' if verdict.monotone else 'no'} "
              f"(max relative uptick {verdict.max_uptick:.3e})")
    else:
        print("Es monotone           yes (single row)")
    print(f"final blowup integral {reports[-1].blowup_integral:.6e}")
    print(f"max norm drift        {max(r.norm_drift for r in reports):.6e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="elflow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"elflow {__version__}")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check-coeffs", help="validate Leslie coefficients")
    c.add_argument("--coeffs", required=True, help="key = value coefficient file")
    c.add_argument("--oracle", action="store_true", help="also run the brute-force minimum")
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=1e-12, help="Parodi tolerance")
    c.set_defaults(func=cmd_check_coeffs)

    g = sub.add_parser("gen-coeffs", help="coefficients from the Maier-Saupe closure")
    g.add_argument("--eta1", type=float, default=doi_onsager.DEFAULT_ETA1)
    g.add_argument("--lambda", dest="lam", type=float, default=doi_onsager.DEFAULT_LAMBDA)
    g.add_argument("--nodes", type=int, default=doi_onsager.DEFAULT_NODES)
    g.set_defaults(func=cmd_gen_coeffs)

    v = sub.add_parser("verify-identities", help="run the identity self-checks")
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify_identities)

    s = sub.add_parser("simulate", help="run the solver from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--output-dir", default=None,
                   help="defaults to an 'output' directory next to the config")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("energy-report", help="summarise a diagnostics CSV")
    e.add_argument("--csv", required=True)
    e.add_argument("--tol", type=float, default=1e-6, help="relative Es uptick tolerance")
    e.set_defaults(func=cmd_energy_report)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
