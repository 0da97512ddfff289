"""Command-line front end.

Exit codes: 0 success, 2 parse or usage error, 3 invalid state,
4 verification-suite failure. Reports are JSON objects
``{command, seed, inputs, results, residuals, config}`` (or CSV tables for
batch runs) and contain no timestamps, so equal flags give equal bytes.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import checks, convex_roof
from .qubit_measures import (
    NumericalError,
    bipartite_tangle_pure,
    d_terms,
    mixed_tangle_2q,
    pair_tangle,
    pure_tangle_2q,
    tangle_routes_2q,
    three_tangle,
    three_tangle_by_residual,
)
from .rebit_measures import (
    mixed_tangle_2r,
    pair_sigma,
    pure_tangle_2r,
    rebit_bipartite,
    rebit_three_tangle_by_residual,
    rebit_three_tangle_pure,
)
from .states import (
    COMPLEX,
    REAL,
    FieldError,
    StateError,
    StateVector,
    as_density,
    catalog,
    catalog_names,
    from_json_dict,
    random_density,
    random_pure,
    validate,
)
from .ubit import A, B, U, OBJECTIVES, embed, is_embedded, relation_report

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_CHECK = 4

CROSS_TOL = 1e-12
ROUTE_TOL = 1e-10
RESIDUAL_ROUTE_TOL = 1e-9
SYMMETRIZED_TOL = 1e-6
ROOF_ORACLE_TOL = 1e-6
RECON_TOL = 1e-10

ROOF_OBJECTIVES = ("tangle", "three_tangle", "joint_tau")


class UsageError(Exception):
    """Bad input or flag combination (exit 2)."""


class InvalidState(Exception):
    """Input parsed but violates a state invariant (exit 3)."""


# ------------------------------------------------------------------ report helpers

def _num(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return float(x)


def _val(x, tol):
    return {"value": _num(x), "tol": tol}


def _res(r, tol):
    r = float(r)
    return {"value": r, "tol": tol, "passed": bool(r <= tol)}


def _matrix(m):
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return [[float(z) for z in row] for row in m]


def _report(command, seed, inputs, results, residuals, config):
    return {
        "command": command,
        "seed": seed,
        "inputs": inputs,
        "results": results,
        "residuals": residuals,
        "config": config,
    }


def _emit(report, fmt, out):
    if fmt == "csv":
        rows = report["results"].get("rows") or [report["results"]]
        buf = io.StringIO()
        flat = [_flatten_row(r) for r in rows]
        header = list(flat[0]) if flat else []
        writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        writer.writerows(flat)
        out.write(buf.getvalue())
    else:
        out.write(json.dumps(report, indent=2))
        out.write("\n")


def _flatten_row(row):
    flat = {}
    for key, entry in row.items():
        v = entry["value"] if isinstance(entry, dict) and "value" in entry else entry
        if isinstance(v, list) and len(v) == 2 and all(isinstance(t, float) for t in v):
            flat[f"{key}_re"], flat[f"{key}_im"] = v
        elif isinstance(v, (int, float, str, bool)) or v is None:
            flat[key] = v
    return flat


# ------------------------------------------------------------------ input

def _load(args):
    """Resolve the input to (state, source-label). Catalog names win over paths."""
    given = [x for x in (args.input, args.catalog, args.file) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one input: a positional name/path, --catalog or --file")
    if args.catalog is not None:
        candidates = [("catalog", args.catalog)]
    elif args.file is not None:
        candidates = [("file", args.file)]
    else:
        candidates = [("catalog", args.input), ("file", args.input)]
    last = None
    for kind, name in candidates:
        if kind == "catalog":
            try:
                return catalog(name), f"catalog:{name}"
            except KeyError as exc:
                last = exc
                continue
        try:
            with open(name) as fh:
                data = json.load(fh)
        except OSError as exc:
            last = exc
            continue
        except json.JSONDecodeError as exc:
            raise UsageError(f"{name}: not valid JSON ({exc})") from None
        return _parse_state(data, name), f"file:{name}"
    raise UsageError(f"cannot resolve input: {last}")


def _parse_state(data, name):
    if not isinstance(data, dict) or "field" not in data:
        raise UsageError(f"{name}: expected a state object with a 'field' key")
    if data.get("field") == REAL:
        im = _imag_parts(data.get("amplitudes", data.get("matrix")))
        if im:
            raise UsageError(f"{name}: real-tagged file has nonzero imaginary parts")
    try:
        return from_json_dict(data)
    except FieldError as exc:
        raise UsageError(f"{name}: {exc}") from None
    except (StateError, ValueError) as exc:
        msg = str(exc)
        if "normalized" in msg:
            raise InvalidState(f"{name}: {msg}") from None
        raise UsageError(f"{name}: {msg}") from None


def _imag_parts(entries):
    try:
        arr = np.asarray(entries, dtype=float)
    except (TypeError, ValueError):
        return False
    return arr.ndim >= 1 and arr.shape[-1] == 2 and bool(np.any(arr[..., 1] != 0))


def _reinterpret(obj, field):
    """Apply ``--field``. Real to complex always works; the other way only
    when every imaginary part is exactly zero."""
    if field is None or field == obj.field:
        return obj
    data = obj.amplitudes if isinstance(obj, StateVector) else obj.matrix
    if field == REAL and np.any(np.imag(data) != 0):
        raise UsageError("--field real needs exactly zero imaginary parts")
    return obj.as_field(field)


def _validated(obj):
    """Validation residuals; raises `InvalidState` on failure."""
    if isinstance(obj, StateVector):
        norm = abs(float(np.sum(np.abs(obj.amplitudes) ** 2)) - 1.0)
        return {"normalization": _res(norm, 1e-12)}
    report = validate(obj)
    if not report.ok:
        bad = ", ".join(f"{c.name}={c.residual:.3g}" for c in report.failed())
        raise InvalidState(f"invalid density: {bad}")
    return {f"valid_{c.name}": _res(c.residual, c.tol) for c in report.checks}


def _describe(obj, source):
    return {
        "source": source,
        "kind": "vector" if isinstance(obj, StateVector) else "density",
        "field": obj.field,
        "n_factors": obj.n_factors,
    }


# ------------------------------------------------------------------ tangle

def tangle_measures(obj, verify=True):
    """Applicable measures for one state, as ``(results, residuals)``."""
    n = obj.n_factors
    real = obj.field == REAL
    results, residuals = {}, {}
    if isinstance(obj, StateVector):
        psi = obj.amplitudes
        if n == 2 and real:
            s = pure_tangle_2r(psi)
            results["sigma"] = _val(s, CROSS_TOL)
            if verify:
                residuals["sigma_trace_route"] = _res(abs(s - mixed_tangle_2r(np.outer(psi, psi))), CROSS_TOL)
        elif n == 2:
            routes = tangle_routes_2q(psi)
            results["tau"] = _val(routes["formula"], ROUTE_TOL)
            if verify:
                residuals["tau_routes"] = _res(routes["max_discrepancy"], ROUTE_TOL)
        elif n == 3:
            d = d_terms(psi)
            for k in ("d1", "d2", "d3"):
                results[k] = _val(getattr(d, k), RESIDUAL_ROUTE_TOL)
            names = ("A", "B", "C")
            if real:
                s = rebit_three_tangle_pure(psi)
                results["sigma_ABC"] = _val(s, RESIDUAL_ROUTE_TOL)
                for h in range(3):
                    rest = "".join(names[f] for f in range(3) if f != h)
                    results[f"sigma_{names[h]}|{rest}"] = _val(rebit_bipartite(psi, h), CROSS_TOL)
                for i, j in ((0, 1), (0, 2), (1, 2)):
                    results[f"sigma_{names[i]}|{names[j]}"] = _val(pair_sigma(psi, i, j), CROSS_TOL)
                if verify:
                    for h in range(3):
                        residuals[f"hyperdet_vs_hinge_{names[h]}"] = _res(
                            abs(rebit_three_tangle_by_residual(psi, h) - s), RESIDUAL_ROUTE_TOL)
                    residuals["abs_vs_qubit_three_tangle"] = _res(
                        abs(abs(s) - three_tangle(psi.astype(complex))), CROSS_TOL)
            else:
                t = three_tangle(psi)
                results["tau_ABC"] = _val(t, RESIDUAL_ROUTE_TOL)
                for h in range(3):
                    rest = "".join(names[f] for f in range(3) if f != h)
                    results[f"tau_{names[h]}|{rest}"] = _val(bipartite_tangle_pure(psi, h), CROSS_TOL)
                for i, j in ((0, 1), (0, 2), (1, 2)):
                    results[f"tau_{names[i]}|{names[j]}"] = _val(pair_tangle(psi, i, j), ROUTE_TOL)
                if verify:
                    for h in range(3):
                        residuals[f"hyperdet_vs_hinge_{names[h]}"] = _res(
                            abs(three_tangle_by_residual(psi, h) - t), RESIDUAL_ROUTE_TOL)
    else:
        m = obj.matrix
        if n == 2 and real:
            s = mixed_tangle_2r(m)
            results["sigma"] = _val(s, CROSS_TOL)
            if verify:
                # any decomposition bounds the roof from above
                bound = convex_roof.eigen_average(obj, pure_tangle_2r)
                residuals["sigma_below_eigen_ensemble"] = _res(max(0.0, s - bound), CROSS_TOL)
        elif n == 2:
            t = mixed_tangle_2q(m)
            results["tau"] = _val(t, SYMMETRIZED_TOL)
            if verify:
                residuals["tau_dilation_vs_symmetrized"] = _res(
                    abs(t - mixed_tangle_2q(m, method="symmetrized")), SYMMETRIZED_TOL)
    return results, residuals


def cmd_tangle(args):
    if args.random is not None:
        return _tangle_random(args)
    obj, source = _load(args)
    obj = _reinterpret(obj, args.field)
    residuals = _validated(obj)
    results, extra = tangle_measures(obj, verify=not args.no_verify)
    residuals.update(extra)
    if not results:
        results["note"] = "no closed-form measure for this input; see the roof command"
    return _report("tangle", args.seed, _describe(obj, source), results, residuals,
                   {"verify": not args.no_verify}), EXIT_OK


def _tangle_random(args):
    field = args.field or COMPLEX
    rng = np.random.default_rng(args.seed)
    rows, residuals = [], {}
    worst = {}
    for k in range(args.random):
        sub = int(rng.integers(2 ** 31))
        if args.rank:
            obj = random_density(field, args.n_factors, args.rank, sub)
        else:
            obj = random_pure(field, args.n_factors, sub)
        res, resid = tangle_measures(obj, verify=not args.no_verify)
        rows.append({"index": k, "sample_seed": sub, **res})
        for name, r in resid.items():
            if name not in worst or r["value"] > worst[name]["value"]:
                worst[name] = r
    residuals.update({f"max_{k}": v for k, v in worst.items()})
    inputs = {"source": "random", "kind": "density" if args.rank else "vector",
              "field": field, "n_factors": args.n_factors, "count": args.random, "rank": args.rank}
    return _report("tangle", args.seed, inputs, {"rows": rows}, residuals,
                   {"verify": not args.no_verify}), EXIT_OK


# ------------------------------------------------------------------ embed

def cmd_embed(args):
    obj, source = _load(args)
    obj = _reinterpret(obj, args.field)
    if obj.field != COMPLEX:
        raise UsageError("embed takes complex-tagged input (pass --field complex to promote)")
    if obj.n_factors != 2:
        raise UsageError("embed takes two-qubit input")
    residuals = _validated(obj)
    emb = embed(obj)
    rho = emb.rho_uab.matrix
    residuals["embedded_symmetry"] = _res(0.0 if is_embedded(emb.rho_uab) else 1.0, 1e-12)
    residuals["uab_trace"] = _res(abs(float(np.trace(rho)) - 1.0), 1e-12)
    results = {"rho_uab": _matrix(rho)}
    if isinstance(obj, StateVector):
        rep = relation_report(obj)
        for k, v in rep.to_dict().items():
            if k != "residuals":
                results[k] = _val(v, ROUTE_TOL)
        for k, v in rep.residuals.items():
            residuals[k] = _res(v, ROUTE_TOL)
        results["relation"] = (f"{rep.tau_ab:.12g} = {rep.sigma_ab:.12g} + ({rep.sigma_uab:.12g})")
    else:
        results["tau_ab"] = _val(mixed_tangle_2q(obj), SYMMETRIZED_TOL)
        results["sigma_ab"] = _val(mixed_tangle_2r(emb.reduced([A, B])), CROSS_TOL)
        results["sigma_a_u"] = _val(mixed_tangle_2r(emb.reduced([A, U])), CROSS_TOL)
        results["note"] = "mixed input: roof terms come from `roof --objective joint_tau`"
    return _report("embed", args.seed, _describe(obj, source), results, residuals,
                   {"factor_order": ["U", "A", "B"]}), EXIT_OK


# ------------------------------------------------------------------ roof

def _roof_config(args):
    return convex_roof.RoofConfig(
        m=args.m, restarts=args.restarts, seed=args.seed, tol=args.tol,
        max_iters=args.max_iters, method=args.method, workers=args.workers,
    )


def _roof_target(obj, objective):
    """Density, pure-state objective and closed-form oracle (or None)."""
    dens = as_density(obj)
    n, real = dens.n_factors, dens.field == REAL
    if objective == "tangle":
        if n != 2:
            raise UsageError("objective 'tangle' takes two-factor input")
        if real:
            return dens, pure_tangle_2r, mixed_tangle_2r(dens)
        return dens, lambda s: pure_tangle_2q(s, verify=False), mixed_tangle_2q(dens)
    if objective == "three_tangle":
        if n != 3:
            raise UsageError("objective 'three_tangle' takes three-factor input")
        return dens, (rebit_three_tangle_pure if real else three_tangle), None
    if n == 2:
        if real:
            raise UsageError("joint_tau on two factors needs complex input (pass --field complex)")
        return embed(dens).rho_uab, OBJECTIVES["joint"], mixed_tangle_2q(dens)
    if n == 3 and real:
        return dens, OBJECTIVES["joint"], None
    raise UsageError("joint_tau takes a complex two-qubit or a real three-rebit input")


def cmd_roof(args):
    obj, source = _load(args)
    obj = _reinterpret(obj, args.field)
    residuals = _validated(obj)
    cfg = _roof_config(args)
    target, objective, oracle = _roof_target(obj, args.objective)
    res = convex_roof.roof_minimize(target, objective, cfg)
    results = res.to_dict()
    results["value"] = _val(res.value, ROOF_ORACLE_TOL if oracle is not None else cfg.tol)
    residuals["reconstruction"] = _res(res.residual, RECON_TOL)
    bound = convex_roof.eigen_average(target, objective)
    residuals["below_eigen_ensemble"] = _res(max(0.0, res.value - bound), cfg.tol)
    if oracle is not None:
        results["closed_form"] = _val(oracle, ROOF_ORACLE_TOL)
        residuals["roof_vs_closed_form"] = _res(abs(res.value - oracle), ROOF_ORACLE_TOL)
    if args.objective == "joint_tau" and obj.n_factors == 3:
        results["embeddable"] = is_embedded(target)
    inputs = _describe(obj, source)
    inputs["objective"] = args.objective
    return _report("roof", args.seed, inputs, results, residuals, cfg.to_dict()), EXIT_OK


# ------------------------------------------------------------------ check

def cmd_check(args):
    cfg = convex_roof.RoofConfig(seed=args.seed, restarts=args.restarts, workers=args.workers)
    names = [args.suite]
    out = checks.run_checks(names, n=args.n, seed=args.seed, roof_n=args.roof_n, cfg=cfg)
    results, residuals = {}, {}
    failed = False
    for suite, props in out.items():
        results[suite] = {}
        for prop, pr in props.items():
            results[suite][prop] = {"n": pr.n, "failures": pr.failures, "passed": pr.passed}
            residuals[f"{suite}.{prop}"] = {"value": pr.max_residual, "tol": pr.tol, "passed": pr.passed}
            failed |= not pr.passed
    inputs = {"suite": args.suite, "n": args.n, "roof_n": args.roof_n}
    config = cfg.to_dict()
    report = _report("check", args.seed, inputs, results, residuals, config)
    return report, (EXIT_CHECK if failed else EXIT_OK)


# ------------------------------------------------------------------ parser

def _add_input(p):
    p.add_argument("input", nargs="?", help="catalog name or JSON state file (names win)")
    p.add_argument("--catalog", help="named state; one of: " + ", ".join(catalog_names()))
    p.add_argument("--file", help="JSON state file")
    p.add_argument("--field", choices=(REAL, COMPLEX), help="reinterpret the input's field tag")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="rebittangle", description="Qubit and rebit entanglement measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tangle", help="closed-form measures of one state, or a random batch")
    _add_input(p)
    _add_common(p)
    p.add_argument("--random", type=int, metavar="N", help="sample N random states instead")
    p.add_argument("--n-factors", type=int, choices=(2, 3), default=2)
    p.add_argument("--rank", type=int, help="with --random: sample densities of this rank")
    p.add_argument("--no-verify", action="store_true", help="skip cross-route checks")
    p.set_defaults(func=cmd_tangle)

    p = sub.add_parser("embed", help="ubit embedding and the pure-state relation report")
    _add_input(p)
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("roof", help="numerical convex roof")
    _add_input(p)
    _add_common(p)
    p.add_argument("--objective", choices=ROOF_OBJECTIVES, required=True)
    defaults = convex_roof.RoofConfig()
    p.add_argument("--m", type=int, default=None, help="ensemble size (default: twice the rank)")
    p.add_argument("--restarts", type=int, default=defaults.restarts)
    p.add_argument("--tol", type=float, default=defaults.tol)
    p.add_argument("--max-iters", type=int, default=defaults.max_iters)
    p.add_argument("--method", choices=("lbfgs", "coordinate"), default=defaults.method)
    p.add_argument("--workers", type=int, default=1, help="parallel restarts (results unchanged)")
    p.set_defaults(func=cmd_roof)

    p = sub.add_parser("check", help="randomized verification suites")
    p.add_argument("suite", choices=checks.SUITES + ("all",))
    _add_common(p)
    p.add_argument("-n", type=int, default=None, help="samples per suite (suite default if omitted)")
    p.add_argument("--roof-n", type=int, default=None, help="densities per field in roof-oracle")
    p.add_argument("--restarts", type=int, default=convex_roof.RoofConfig().restarts)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FieldError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidState, StateError, NumericalError) as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.output:
        with open(args.output, "w", newline="") as fh:
            _emit(report, args.fmt, fh)
    else:
        _emit(report, args.fmt, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
