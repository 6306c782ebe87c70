"""``tsmatrix`` command line: solve, certify, exp, fuzz and repro."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from ..certifier import as_curve, certify
from ..errors import TsMatrixError
from ..solver import Trajectory, multiplicity_probe, solve_explicit, solve_linear_sigma, solve_sigma
from ..timescale import GridSpec
from ..tsexp import exp_ode_path
from . import config as cf
from .repro import EXAMPLES


def write_atomic(path, text):
    """Write via a temporary file in the target directory and rename it into place."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text, out):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _apply_overrides(cfg, args):
    if getattr(args, "dense_step", None) is not None:
        cfg["grid"]["dense_step"] = args.dense_step
    if getattr(args, "tol", None) is not None:
        cfg["tolerances"]["psd_tol"] = args.tol
    for key in ("seed", "samples", "trials"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    return cfg


def _solve(cfg) -> Trajectory:
    ts, g = cf.timescale(cfg), cf.grid(cfg)
    A = np.array(cfg["A"])
    a, b = cfg["a"], cfg["b"]
    if cfg["form"] == "linear":
        V, G = cf.linear_parts(cfg)
        return solve_linear_sigma(V, G, ts, a, b, A, g, cf.tolerances(cfg))
    F = cf.build_field(cfg)
    if cfg["form"] == "sigma":
        return solve_sigma(F, ts, a, b, A, g, **cfg["solver"])
    return solve_explicit(F, ts, a, b, A, g)


def cmd_solve(cfg, args):
    _emit(_solve(cfg).to_csv(), args.out)
    return 0


def cmd_certify(cfg, args):
    theorem = args.theorem or cfg["theorem"]
    if theorem is None:
        raise cf.ConfigError("certify needs a theorem (config key 'theorem' or --theorem)")
    rep = certify(theorem, cf.build_problem(cfg))
    print(rep.table())
    if args.out:
        write_atomic(args.out, rep.to_json() + "\n")
    return 0 if rep.passed else 1


def cmd_exp(cfg, args):
    """e_K(t, a) at every grid node, with K taken from the config's bound."""
    K = cf.build_bound(cfg)
    if K is None:
        raise cf.ConfigError("exp needs the generator under 'bound'", path=["bound"])
    g, E = exp_ode_path(as_curve(K, cfg["n"]), cf.timescale(cfg), cfg["a"], cfg["b"], cf.grid(cfg),
                        cf.tolerances(cfg))
    _emit(Trajectory(g.times, E, "explicit", cf.grid(cfg)).to_csv(), args.out)
    return 0


def cmd_fuzz(cfg, args):
    form = "sigma" if cfg["form"] in ("sigma", "linear") else "explicit"
    rep = multiplicity_probe(cf.build_field(cfg), form, cf.timescale(cfg), cfg["a"], cfg["b"], np.array(cfg["A"]),
                             cf.grid(cfg), cfg["trials"], cfg["seed"], **cfg["solver"])
    _emit(json.dumps(rep.to_dict(), indent=2) + "\n", args.out)
    verdict = "multiplicity suspected" if rep.multiplicity_suspected else "no multiplicity detected"
    print(f"max pairwise distance {rep.max_distance:.3e} (threshold {rep.threshold:.1e}): {verdict}",
          file=sys.stderr)
    return 1 if rep.multiplicity_suspected else 0


def cmd_repro(args):
    names = list(EXAMPLES) if args.example == "all" else [args.example]
    ok, lines = True, []
    for name in names:
        kw = {}
        if args.dense_step is not None:
            kw["grid"] = GridSpec(args.dense_step)
        if name != "example2":
            if args.seed is not None:
                kw["seed"] = args.seed
            if args.samples is not None:
                kw["samples"] = args.samples
        for outcome in EXAMPLES[name](**kw):
            print(outcome.line())
            lines.append(outcome.line())
            ok = ok and outcome.ok
    if args.out:
        write_atomic(args.out, "\n".join(lines) + "\n")
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="tsmatrix", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("config", help="problem configuration (JSON)")
        sp.add_argument("--out", help="output file (written atomically); default stdout")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--samples", type=int)
        sp.add_argument("--dense-step", type=float)
        sp.add_argument("--tol", type=float, help="override psd_tol")
        return sp

    common(sub.add_parser("solve", help="solve the IVP and write the trajectory CSV"))
    c = common(sub.add_parser("certify", help="check the hypotheses of a uniqueness result"))
    c.add_argument("--theorem", help="theorem tag, overrides the config")
    common(sub.add_parser("exp", help="write e_K(t, a) on the grid as CSV"))
    f = common(sub.add_parser("fuzz", help="multiplicity probe"))
    f.add_argument("--trials", type=int)
    r = common(sub.add_parser("repro", help="reproduce the worked examples"), config=False)
    r.add_argument("example", nargs="?", default="all", choices=[*EXAMPLES, "all"])
    return p


COMMANDS = {"solve": cmd_solve, "certify": cmd_certify, "exp": cmd_exp, "fuzz": cmd_fuzz}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "repro":
            return cmd_repro(args)
        cfg = _apply_overrides(cf.load_config(args.config), args)
        cf.parse_config(cf.print_config(cfg))  # overrides must still validate
        return COMMANDS[args.command](cfg, args)
    except (TsMatrixError, OSError, ValueError) as exc:
        print(f"tsmatrix {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
