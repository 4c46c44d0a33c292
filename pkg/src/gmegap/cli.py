"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np
from pydantic import ValidationError

from . import stateio
from .numeric import NumericalError
from .separability import OptimizerConfig, gap_from_energies, ksep_energy
from .sweep import ConfigError, HeisenbergModel, LatticeSpec, Spin1ChainModel, config_schema, load_config, run_sweep
from .tensor import Operator, eig_hermitian
from .thermal import thermal_state
from .witnesses import (
    entropy_threshold_ksep,
    entropy_witness,
    gap_witness,
    gme_concurrence_pure,
    q_witness,
)

EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 2, 3, 4


def _model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["heisenberg", "spin1-chain"], default="heisenberg")
    g.add_argument("--hamiltonian", metavar="FILE", help="operator file; overrides the model flags")
    g.add_argument("--lattice", choices=["chain", "square"], default="square")
    g.add_argument("--dims", type=int, nargs="+", default=[2, 2])
    g.add_argument("--boundary", choices=["open", "periodic"], default="open")
    g.add_argument("--J", type=float, default=1.0)
    g.add_argument("--gamma", type=float, default=0.0)
    g.add_argument("--delta", type=float, default=1.0)
    g.add_argument("--h", type=float, default=0.0)
    g.add_argument("--beta", type=float, default=1.0)
    g.add_argument("--n", type=int, default=3, help="spin-1 chain length")


def _opt_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--max-sweeps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)


def _hamiltonian(args) -> Operator:
    if args.hamiltonian:
        op = stateio.load(args.hamiltonian)
        if not isinstance(op, Operator):
            raise ConfigError("file does not hold an operator", "--hamiltonian")
        return op
    try:
        if args.model == "heisenberg":
            m = HeisenbergModel(J=args.J, gamma=args.gamma, delta=args.delta, h=args.h,
                                lattice=LatticeSpec(kind=args.lattice, dims=args.dims, boundary=args.boundary))
        else:
            m = Spin1ChainModel(n=args.n, beta=args.beta, h=args.h, boundary=args.boundary)
        return m.hamiltonian()
    except (ValidationError, ValueError) as exc:
        raise ConfigError(str(exc), "model") from None


def _optimizer(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(restarts=args.restarts, max_sweeps=args.max_sweeps, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc), "optimizer") from None


def _emit(obj, as_json: bool, text: str) -> None:
    print(json.dumps(obj, indent=1) if as_json else text)


def cmd_spectrum(args) -> int:
    spec = eig_hermitian(_hamiltonian(args))
    levels = spec.levels()
    text = "\n".join(f"{e: .12f}  x{m}" for e, m in levels)
    _emit({"levels": [{"energy": e, "degeneracy": m} for e, m in levels]}, args.json, text)
    return 0


def cmd_ksep(args) -> int:
    h = _hamiltonian(args)
    if not 1 <= args.k <= h.shape.n_sites:
        raise ConfigError(f"k={args.k} outside 1..{h.shape.n_sites}", "--k")
    e0 = eig_hermitian(h).ground_energy
    res = ksep_energy(h, args.k, _optimizer(args))
    doc = {
        "k": args.k,
        "E0": e0,
        "E_ksep": res.energy,
        "gap": gap_from_energies(res.energy, e0),
        "argmin_partition": str(res.argmin.partition),
        "per_partition": {str(p): e for p, e in res.per_partition.items()},
        "converged": res.converged,
        "consensus": res.consensus,
        "caveat": res.caveat,
    }
    text = "\n".join(
        [f"E0        {e0:.12f}", f"E_{args.k}sep    {res.energy:.12f}", f"gap       {doc['gap']:.12f}",
         f"argmin    {doc['argmin_partition']}", f"converged {res.converged}  consensus {res.consensus:.0%}"]
        + ([f"caveat    {res.caveat}"] if res.caveat else [])
        + [f"  {p:<12} {e:.12f}" for p, e in doc["per_partition"].items()]
    )
    _emit(doc, args.json, text)
    return 0


def cmd_concurrence(args) -> int:
    spec = eig_hermitian(_hamiltonian(args))
    rep = gme_concurrence_pure(spec.ground_state())
    doc = {"C_gme": rep.value, "minimizing_bipartition": str(rep.minimizing_bipartition),
           "ground_degeneracy": spec.degeneracy}
    text = f"C_gme {rep.value:.12f}  (bipartition {rep.minimizing_bipartition}, ground degeneracy {spec.degeneracy})"
    _emit(doc, args.json, text)
    return 0


def cmd_witness(args) -> int:
    rho = stateio.as_density(stateio.load(args.state))
    criteria = [c.strip() for c in args.criteria.split(",") if c.strip()]
    needs_h = any(c.startswith(("gap-k", "entropy")) for c in criteria)
    h = _hamiltonian(args) if needs_h else None
    if h is not None and h.shape != rho.shape:
        raise ConfigError(f"state dims {rho.shape.local_dims} do not match Hamiltonian {h.shape.local_dims}", "state")
    cfg = _optimizer(args)
    out = []
    for c in criteria:
        if c.startswith("gap-k"):
            out.append(gap_witness(rho, h, ksep_energy(h, int(c[5:]), cfg)))
        elif c == "Q":
            out.append(q_witness(rho, lu_trials=args.lu_trials, seed=args.seed))
        elif c.startswith("entropy"):
            k = int(c.split("-k")[1]) if "-k" in c else 2
            spec = eig_hermitian(h)
            ground = spec.ground_state()
            thr = entropy_threshold_ksep(ground, k, cfg)
            sigma = thermal_state(spec, args.kT).state if args.kT is not None else rho
            out.append(entropy_witness(sigma, ground, k, thr))
        else:
            raise ConfigError(f"unknown criterion {c!r}", "--criteria")
    docs = [v.to_dict() for v in out]
    text = "\n".join(
        f"{v.criterion:<10} value {v.value: .10f}  threshold {v.threshold: .10f}  "
        f"{'DETECTED' if v.detected else 'not detected'}" + (f"  [{v.caveat}]" if v.caveat else "")
        for v in out
    )
    _emit(docs, args.json, text)
    return 0


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        text = fh.read()
    cfg = load_config(text)
    res = run_sweep(cfg, workers=args.workers)
    path = args.output or cfg.output.path
    fmt = args.format or cfg.output.format
    if path:
        res.write(path, fmt)
    else:
        sys.stdout.write(res.to_csv() if fmt == "csv" else res.to_json() + "\n")
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(config_schema(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmegap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues and degeneracies of a Hamiltonian")
    _model_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ksep", help="minimum energy over k-separable states")
    _model_args(p)
    _opt_args(p)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_ksep)

    p = sub.add_parser("witness", help="evaluate criteria on a state file")
    p.add_argument("state", help="state file (pure or density)")
    _model_args(p)
    _opt_args(p)
    p.add_argument("--criteria", default="gap-k2,Q")
    p.add_argument("--lu-trials", type=int, default=0)
    p.add_argument("--kT", type=float, default=None, help="for entropy: use the model's thermal state at kT")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("sweep", help="run a sweep config file")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("concurrence", help="gme-concurrence of a Hamiltonian's ground state")
    _model_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("schema", help="print the sweep config JSON schema")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, stateio.StateFileError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
