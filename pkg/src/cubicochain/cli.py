"""Command-line entry point.

Exit codes: 0 success, 1 a verdict or certificate failed, 2 usage, input or
hypothesis error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .cochains import FormCochain, check_upper_gradient, check_upper_norm, upper_gradient_density, upper_norm_density
from .experiments import RUNNERS, ExperimentConfig, HypothesisError, run_experiment
from .flat import fill_volume, flat_norm
from .grid import Chain, boundary, mass
from .modulus import Density, capacity_lower, modulus

CERT_TOL = 1e-6


class UsageError(Exception):
    pass


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=1, default=io._json_default)
    print(text)
    if out:
        io.write_json(out, obj)


def _finite(v):
    return v if isinstance(v, (int, float)) and math.isfinite(v) else (None if v is None else repr(float(v)))


def _density_for(path, domain):
    dom, values = io.load_density(path)
    if dom != domain:
        raise UsageError(f"{path}: density domain differs from the chain domain")
    return values


def cmd_flatnorm(a) -> int:
    T = io.load_chain(a.chain)
    hD = gD = None
    if a.weights:
        hD = _density_for(a.weights[0], T.domain)
        gD = _density_for(a.weights[1], T.domain)
    dec = flat_norm(T, tol=a.tol, backend=a.backend, h_density=hD, g_density=gD, margin=(None if a.weights else 0))
    _emit({"value": dec.value, "mass_R": dec.mass_R, "mass_V": dec.mass_V, "residual": dec.residual,
           "dual_value": dec.dual_value, "gap": dec.gap}, a.out)
    return 0 if dec.gap <= CERT_TOL * (1 + dec.value) else 1


def cmd_fillvol(a) -> int:
    T = io.load_chain(a.chain)
    dens = _density_for(a.density, T.domain) if a.density else None
    fv = fill_volume(T, tol=a.tol, backend=a.backend, density=dens, margin=(None if dens is not None else 0))
    out = {"value": _finite(fv.value), "feasible": fv.feasible, "residual": _finite(fv.residual),
           "dual_value": _finite(fv.dual_value), "gap": fv.gap}
    if fv.feasible:
        out["mass_S"] = mass(fv.S)
    _emit(out, a.out)
    return 0 if (not fv.feasible or fv.gap <= CERT_TOL * (1 + fv.value)) else 1


def _mu(a, domain):
    return Density(domain, _density_for(a.mu, domain)) if a.mu else None


def cmd_modulus(a) -> int:
    fam = [io.load_chain(p) for p in a.family]
    _same_domain(fam)
    sol = modulus(fam, a.p, mu=_mu(a, fam[0].domain), tol=a.tol)
    _emit({"value": _finite(sol.value), "lower_bound": _finite(sol.lower_bound), "kkt_residual": sol.kkt_residual,
           "iterations": sol.iterations}, a.out)
    return 0 if sol.kkt_residual <= 1e-8 else 1


def cmd_capacity(a) -> int:
    T = io.load_chain(a.chain)
    fills = [io.load_chain(p) for p in a.fillings]
    _same_domain([T] + fills)
    sol = capacity_lower([T], fills, a.p, mu=_mu(a, T.domain), tol=a.tol)
    _emit({"capacity_lower": _finite(sol.lower_bound), "value": _finite(sol.value), "kkt_residual": sol.kkt_residual,
           "fillings": len(fills)}, a.out)
    return 0 if sol.kkt_residual <= 1e-8 else 1


def cmd_verify_cochain(a) -> int:
    form = io.load_form(a.form)
    omega = FormCochain(form)
    family = [io.load_chain(p) for p in a.family or []]
    fillings = [io.load_chain(p) for p in a.fillings or []]
    for T in family + fillings:
        if T.domain != form.domain:
            raise UsageError("chains and form must share a domain")
    hD = _density_for(a.upper_norm, form.domain) if a.upper_norm else upper_norm_density(form)
    result = {"upper_norm": [], "upper_gradient": []}
    ok = True
    if family:
        rn = check_upper_norm(omega, hD, family, tol=a.tol)
        result["upper_norm"] = rn.rows
        ok &= rn.passed
    if fillings:
        if form.degree >= form.domain.n:
            raise UsageError("top-degree forms have no upper-gradient check")
        gD = _density_for(a.upper_gradient, form.domain) if a.upper_gradient else upper_gradient_density(form)
        rg = check_upper_gradient(omega, gD, [(boundary(S), S) for S in fillings], tol=a.tol)
        result["upper_gradient"] = rg.rows
        ok &= rg.passed
    result["pass"] = bool(ok)
    _emit(result, a.out)
    return 0 if ok else 1


def cmd_experiment(a) -> int:
    name = a.name.replace("-", "_")
    if name not in RUNNERS:
        raise UsageError(f"unknown experiment {a.name!r}; choose from {', '.join(RUNNERS)}")
    cfg = ExperimentConfig.load(a.config, name) if a.config else ExperimentConfig(name)
    cfg.name = name
    if a.seed is not None:
        cfg.seed = a.seed
    rep = run_experiment(cfg)
    out = a.out or cfg.out
    if out:
        rep.write(out)
    print(json.dumps(rep.summary(), indent=1))
    return 0 if rep.passed else 1


def cmd_convert(a) -> int:
    src, dst = Path(a.input), Path(a.output)
    if src.suffix.lower() == ".json" and dst.suffix.lower() == ".csv":
        doc = io.load_json(src)
        if isinstance(doc, dict) and "rows" in doc and "columns" in doc:
            dst.write_text(io.rows_to_csv(doc["rows"], doc["columns"]))
        else:
            dst.write_text(chain_to_csv(io.chain_from_dict(doc)))
    elif src.suffix.lower() == ".csv" and dst.suffix.lower() == ".json":
        io.save_chain(dst, chain_from_csv(src.read_text()))
    else:
        raise UsageError("convert supports .json -> .csv and .csv -> .json")
    return 0


def chain_to_csv(T: Chain) -> str:
    d = T.domain
    head = f"# n={d.n} h={d.h!r} lo={','.join(map(str, d.lo))} hi={','.join(map(str, d.hi))} dim={T.dim}\n"
    rows = [{"base": " ".join(map(str, b)), "axes": " ".join(map(str, ax)), "coeff": c} for b, ax, c in T.to_cells()]
    return head + io.rows_to_csv(rows, ["base", "axes", "coeff"])


def chain_from_csv(text: str) -> Chain:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise io.FormatError("chain CSV must start with a '# n=.. h=.. lo=.. hi=.. dim=..' line")
    try:
        meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        header = {"n": int(meta["n"]), "h": float(meta["h"]), "lo": [int(v) for v in meta["lo"].split(",")],
                  "hi": [int(v) for v in meta["hi"].split(",")], "dim": int(meta["dim"])}
        cells = []
        for r in csv.DictReader(lines[1:]):
            cells.append({"base": [int(v) for v in r["base"].split()], "axes": [int(v) for v in r["axes"].split()],
                          "coeff": float(r["coeff"])})
    except (KeyError, ValueError) as exc:
        raise io.FormatError(f"bad chain CSV: {exc}") from exc
    header["cells"] = cells
    return io.chain_from_dict(header)


def _same_domain(chains):
    if any(T.domain != chains[0].domain for T in chains):
        raise UsageError("all chains must share a domain")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubicochain", description="Chains, cochains, flat norms and moduli on cubical grids.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, lp=True):
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--out", help="also write the JSON result here")
        p.add_argument("--seed", type=int, default=None)
        if lp:
            p.add_argument("--backend", choices=["highs", "simplex"], default="highs")

    p = sub.add_parser("flatnorm", help="flat norm of a chain")
    p.add_argument("--chain", required=True)
    p.add_argument("--weights", nargs=2, metavar=("H", "G"), help="density files for R and V")
    common(p)
    p.set_defaults(func=cmd_flatnorm)

    p = sub.add_parser("fillvol", help="filling volume of a chain")
    p.add_argument("--chain", required=True)
    p.add_argument("--density", help="weight density for the filling")
    common(p)
    p.set_defaults(func=cmd_fillvol)

    p = sub.add_parser("modulus", help="p-modulus of a family of chains")
    p.add_argument("--family", nargs="+", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--mu", help="measure density")
    common(p, lp=False)
    p.set_defaults(func=cmd_modulus)

    p = sub.add_parser("capacity", help="certified capacity lower bound from fillings")
    p.add_argument("--chain", required=True)
    p.add_argument("--fillings", nargs="+", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--mu")
    common(p, lp=False)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("verify-cochain", help="check upper norm / upper gradient densities of a form")
    p.add_argument("--form", required=True)
    p.add_argument("--family", nargs="*", help="chains for the upper-norm check")
    p.add_argument("--fillings", nargs="*", help="chains S for the upper-gradient check on (dS, S)")
    p.add_argument("--upper-norm", help="density file (default C1 |omega|)")
    p.add_argument("--upper-gradient", help="density file (default C2 |d omega|)")
    common(p, lp=False)
    p.set_defaults(func=cmd_verify_cochain)

    p = sub.add_parser("experiment", help="run an experiment")
    p.add_argument("name", help=", ".join(RUNNERS))
    p.add_argument("--config")
    p.add_argument("--out", help="CSV (plus .summary.json) or JSON output")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("convert", help="convert chains or reports between JSON and CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=cmd_convert)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    if getattr(a, "seed", None) is not None:
        np.random.seed(a.seed)
    try:
        return a.func(a)
    except (io.FormatError, UsageError, HypothesisError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"cubicochain {a.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"cubicochain {a.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
