"""Command-line entry point ``sparse-rmt``.

Exit status: 0 on success, 2 on configuration/input errors, 3 on numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ensemble as ens
from . import harness, resolvent, spectra, term_calculus
from .errors import ConfigurationError, NumericalError, SparseRMTError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_RECIPE_OF = {
    "clt-eigenvalue": "EigenvalueCLT",
    "clt-counting": "CountingCLT",
    "clt-mesoscopic": "Mesoscopic",
    "local-law": "LocalLaw",
    "shifted-moment": "ShiftedMoment",
}


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _common(p, replicas_default=None):
    p.add_argument("--config", help="JSON or YAML config file")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--replicas", type=int, default=replicas_default, help="number of replicas M")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--out", help="output directory")
    p.add_argument("--N", type=int, help="matrix size (overrides config)")
    p.add_argument("--beta", type=float, help="sparsity exponent (overrides config)")
    p.add_argument("--law", help="ErdosRenyi or SignedBernoulli")


def _config_data(args) -> dict:
    data = ens._read_mapping(args.config) if args.config else {}
    section = dict(data.get("ensemble", {}))
    for key in ("N", "beta", "law"):
        v = getattr(args, key, None)
        if v is not None:
            section[key] = v
    if "law" in section and args.law is not None and "f_mode" in section:
        if ens._canonical_law(args.law) == ens.ERDOS_RENYI:
            section["f_mode"] = "centered"
    data["ensemble"] = section
    return data


def _spec(args):
    return ens.spec_from_dict(_config_data(args)["ensemble"])


def _experiment(args, recipe):
    data = _config_data(args)
    exp = dict(data.get("experiment", {}))
    if exp.get("recipe", recipe) != recipe:
        raise ConfigurationError(
            f"config recipe {exp['recipe']!r} does not match subcommand recipe {recipe!r}")
    exp["recipe"] = recipe
    if args.seed is not None:
        exp["seed"] = args.seed
    if args.replicas is not None:
        exp["replicas"] = args.replicas
    if args.workers is not None:
        exp["workers"] = args.workers
    data["experiment"] = exp
    params = dict(data.get("params", {}))
    if getattr(args, "tau", None) is not None:
        params["tau"] = args.tau
    if getattr(args, "fractions", None):
        params["fractions"] = _floats(args.fractions)
    if getattr(args, "energies", None):
        params["energies"] = _floats(args.energies)
    if getattr(args, "z", None):
        params["z"] = [[float(v) for v in item.split(":")] for item in args.z]
    data["params"] = params
    if args.out is not None:
        data["output"] = {"dir": args.out}
    return harness.ExperimentConfig.from_dict(data)


def _seeds(args, M):
    data = _config_data(args)
    master = args.seed if args.seed is not None else int(data.get("experiment", {}).get("seed", 0))
    return [harness.derive_seed(master, r) for r in range(M)]


def _outdir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_sample(args):
    spec = _spec(args)
    M = args.replicas or 1
    out = _outdir(args)
    ens.save_spec(spec, out / "ensemble.json")
    for r, seed in enumerate(_seeds(args, M)):
        s = ens.sample(spec, seed)
        ens.dump_matrix(s.H, out / f"H_{r:04d}.bin")
        ens.dump_matrix(s.A, out / f"A_{r:04d}.bin")
        print(f"replica {r} seed {seed} H2-1 {ens.h2_statistic(s):.6e}")
    return EXIT_OK


def cmd_spectrum(args):
    spec = _spec(args)
    M = args.replicas or 1
    out = _outdir(args)
    rows = []
    for seed in _seeds(args, M):
        s = ens.sample(spec, seed)
        rows.append(spectra.eigen_decompose(s.H if args.matrix == "H" else s.A))
    spectra.write_spectra_csv(rows, out / "spectra.csv")
    print(f"wrote {M} spectra of {args.matrix} (N={spec.N}) to {out / 'spectra.csv'}")
    return EXIT_OK


def cmd_resolvent_scan(args):
    spec = _spec(args)
    M = args.replicas or 1
    data = _config_data(args)
    if args.z:
        zs = [complex(*map(float, item.split(":"))) for item in args.z]
    else:
        zs = harness._z_entries(data.get("params", {}), spec.N)
    traces = np.empty((M, len(zs)), dtype=complex)
    h2 = np.empty(M)
    for r, seed in enumerate(_seeds(args, M)):
        s = ens.sample(spec, seed)
        h2[r] = ens.h2_statistic(s)
        traces[r] = resolvent.trace_green(spectra.eigen_decompose(s.H), np.array(zs))
    rows = []
    for k, z in enumerate(zs):
        st = resolvent.shifted_stat(traces[:, k], h2, z, allow_single=(M == 1))
        rows.extend((r, z.real, z.imag, traces[r, k], st.value[r]) for r in range(M))
    out = _outdir(args)
    resolvent.write_resolvent_scan_csv(rows, out / "resolvent_scan.csv")
    print(f"wrote {len(rows)} rows to {out / 'resolvent_scan.csv'}")
    return EXIT_OK


def _summary(report):
    lines = [f"recipe {report.config.recipe}: {len(report.raw)} replicas ok, "
             f"{len(report.failures)} failed"]
    for t in report.targets:
        lines.append(f"  {t['statistic']}: observed {t['observed']:.6g}, theory {t['theory']:.6g}, "
                     f"ratio {t['ratio']:.4g}  [{t['formula']}]")
    return "\n".join(lines)


def cmd_recipe(args):
    config = _experiment(args, _RECIPE_OF[args.command])
    report = harness.run(config)
    print(_summary(report))
    if config.out_dir is None:
        print("(no --out given; nothing written)")
    return EXIT_OK


def cmd_term_calc(args):
    mono = term_calculus.parse(args.monomial)
    prof = term_calculus.profile(mono)
    result = {"monomial": str(mono), "classes": sorted(term_calculus.classes(mono)),
              "profile": prof.to_dict()}
    if args.lemma:
        expr = term_calculus.bound(mono, args.lemma)
        result["bound"] = {"lemma": expr.lemma, "expression": str(expr)}
        if args.alpha is not None and args.beta is not None and args.bigN is not None:
            result["bound"]["value"] = term_calculus.evaluate(
                expr, args.bigN, args.alpha, args.beta, args.M, n=args.n)
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        print(f"monomial: {result['monomial']}")
        print(f"classes:  {', '.join(result['classes'])}")
        for k, v in result["profile"].items():
            print(f"  {k} = {v}")
        if "bound" in result:
            print(f"bound ({result['bound']['lemma']}): {result['bound']['expression']}")
            if "value" in result["bound"]:
                print(f"  value = {result['bound']['value']:.6e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sparse-rmt", description="Sparse random-matrix laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw matrices and dump them as binary files")
    _common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("spectrum", help="eigenvalues of sampled matrices as CSV")
    _common(p)
    p.add_argument("--matrix", choices=("A", "H"), default="A")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("resolvent-scan", help="normalised traces and [G] over a z grid")
    _common(p)
    p.add_argument("--z", action="append", help="E:eta (repeatable)")
    p.set_defaults(func=cmd_resolvent_scan)

    for name, recipe in _RECIPE_OF.items():
        p = sub.add_parser(name, help=f"run the {recipe} experiment")
        _common(p)
        p.add_argument("--tau", type=float)
        if recipe == "EigenvalueCLT":
            p.add_argument("--fractions", help="comma-separated index fractions, e.g. 0.25,0.35,0.7")
        elif recipe == "CountingCLT":
            p.add_argument("--energies", help="comma-separated energies")
        else:
            p.add_argument("--z", action="append", help="E:eta (repeatable)")
        p.set_defaults(func=cmd_recipe)

    p = sub.add_parser("term-calc", help="classify a monomial and compute its exponents")
    p.add_argument("monomial")
    p.add_argument("--lemma", choices=term_calculus.LEMMAS)
    p.add_argument("--json", action="store_true")
    p.add_argument("--N", dest="bigN", type=float, help="evaluate the bound at this N")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--M", type=float, default=1.0, help="value of the moment norm M")
    p.add_argument("--n", type=int, help="moment order n")
    p.set_defaults(func=cmd_term_calc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SparseRMTError, KeyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
