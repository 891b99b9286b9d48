"""``nls`` command-line entry point.

Exit status: 0 on success, 1 when a verification fails, 2 on bad input.
Output files are written atomically, so nothing is left behind on exit 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np

from .config import COMMANDS, SUITES, RunConfig, resolve_threads
from .inverse import SolverError

__all__ = ["main", "run", "build_parser", "InputError"]

logger = logging.getLogger("nlsist")


class InputError(Exception):
    """Malformed or missing input; maps to exit status 2."""


def build_parser():
    p = argparse.ArgumentParser(prog="nls", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="input JSON (potential, reflection or field)")
    p.add_argument("--output", help="output path (.json, or .csv for tables and samples)")
    p.add_argument("--suite", choices=SUITES, help="suite for the verify command")
    p.add_argument("--t", type=float, default=0.0, help="time")
    p.add_argument("--x-min", type=float, default=-40.0)
    p.add_argument("--x-max", type=float, default=40.0)
    p.add_argument("--nx", type=int, default=4096)
    p.add_argument("--z-half-width", type=float, default=40.0)
    p.add_argument("--nz", type=int, default=4096)
    p.add_argument("--tol", type=float, default=1e-10, help="solver tolerance")
    p.add_argument("--dt", type=float, default=0.05, help="oracle time step")
    p.add_argument("--times", default="100,200,400,800", help="decay-fit times, comma separated")
    p.add_argument("--threads", type=int, default=None, help="FFT workers (overrides NLS_THREADS)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_json(path, what):
    if path is None:
        raise InputError(f"{what}: --input is required")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{what}: cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _parse(factory, data, path):
    try:
        return factory(data)
    except KeyError as exc:
        raise InputError(f"{path}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _sampled(path, what):
    from .spectral import SampledFn

    return _parse(SampledFn.from_dict, _load_json(path, what), path)


def _write(path, text):
    """Write ``text`` to ``path`` atomically (stdout if ``path`` is None)."""
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nls-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _samples_csv(x, q):
    lines = ["x,re(q),im(q)"] + [f"{a!r},{b.real!r},{b.imag!r}" for a, b in zip(x, q)]
    return "\n".join(lines) + "\n"


def _emit_samples(cfg, grid, values, t):
    from .spectral import SampledFn

    if cfg.output and cfg.output.endswith(".csv"):
        return _samples_csv(grid.points, values)
    d = SampledFn(grid, values).to_dict()
    d["t"] = t
    return json.dumps(d)


def run(cfg, times=(100.0, 200.0, 400.0, 800.0)):
    """Execute one command; returns ``(status, text)`` where ``text`` is the artifact."""
    from . import asymptotics, inverse, oracle, scattering, verify

    if cfg.command == "scatter":
        samples = _sampled(cfg.input, "scatter")
        q = scattering.Potential(samples)
        sd = scattering.scattering_coefficients(q, cfg.zgrid)
        return 0, sd.to_json()
    if cfg.command == "invert":
        r = _sampled(cfg.input, "invert")
        xs = cfg.xgrid.points
        res = inverse.reconstruct_potential(r, xs, t=cfg.t, tol=cfg.tol, threads=cfg.threads)
        if cfg.output and cfg.output.endswith(".csv"):
            return 0, res.to_csv()
        return 0, res.to_json()
    if cfg.command == "evolve":
        r = _sampled(cfg.input, "evolve")
        return 0, inverse.evolve_reflection(r, cfg.t).to_json()
    if cfg.command == "asym":
        if not cfg.t > 0:
            raise InputError("asym needs --t > 0")
        r = _sampled(cfg.input, "asym")
        grid = cfg.xgrid
        q = asymptotics.q_asymptotic(r, grid.points, cfg.t)
        return 0, _emit_samples(cfg, grid, np.asarray(q), cfg.t)
    if cfg.command == "oracle":
        samples = _sampled(cfg.input, "oracle")
        state = oracle.FieldState(samples.grid, samples.values, 0.0)
        out = oracle.split_step_evolve(state, cfg.t, oracle.StepperConfig(cfg.dt), cfg.threads)
        return 0, out.to_json()
    if cfg.command == "verify":
        if cfg.suite is None:
            raise InputError("verify needs --suite")
        report = verify.verify_suite(cfg.suite, cfg)
        sys.stderr.write(report.summary() + "\n")
        return (0 if report.passed else 1), report.to_json()
    if cfg.command == "decay-fit":
        if cfg.input is None:
            q0 = scattering.Potential.gaussian(cfg.xgrid, 0.3)
        else:
            q0 = scattering.Potential(_sampled(cfg.input, "decay-fit"))
        table = oracle.compare_asymptotics(q0, list(times), zgrid=cfg.zgrid, dt=cfg.dt,
                                           threads=cfg.threads)
        sys.stderr.write(f"slope {table.slope:.6g}\n")
        return 0, table.to_csv()
    raise InputError(f"unknown command {cfg.command!r}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        threads = resolve_threads(args.threads)
        times = tuple(float(s) for s in args.times.split(",") if s.strip())
        cfg = RunConfig(
            command=args.command, input=args.input, output=args.output, suite=args.suite,
            t=args.t, x_min=args.x_min, x_max=args.x_max, nx=args.nx,
            z_half_width=args.z_half_width, nz=args.nz, tol=args.tol, dt=args.dt,
            threads=threads, seed=args.seed,
        )
        status, text = run(cfg, times)
    except SolverError as exc:
        sys.stderr.write(f"nls: solver failure: {exc}\n")
        return 1
    except InputError as exc:
        sys.stderr.write(f"nls: error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"nls: error: {exc}\n")
        return 2
    _write(cfg.output, text)
    return status


if __name__ == "__main__":
    sys.exit(main())
