"""Command-line frontend: ``equidist <command> [options]``.

Every run resolves its options into a RunConfig (command, parameters, seed,
stream, output_path, format), validates it against the shipped JSON schema
and embeds it in the output.  JSON outputs are an envelope
``{"config": ..., "result": ...}``; CSV outputs start with a single
``# config: {...}`` comment line.  Data goes to stdout or the output path,
progress to stderr.

Exit codes: 0 success, 1 domain or parameter error, 2 identity-suite
failure, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from equidist import identities, lattice, modular, transforms, variance
from equidist.arith import L1_chi
from equidist.errors import DomainError, ResourceCapError
from equidist.io import csv_text, dumps
from equidist.sphere import RandomSource

log = logging.getLogger("equidist")

OUTPUT_DIR_ENV = "EQUIDIST_OUTPUT_DIR"
EXIT_OK, EXIT_DOMAIN, EXIT_IDENTITY, EXIT_CAP = 0, 1, 2, 3
COMMANDS = ("enumerate", "forms", "geodesics", "variance", "linnik", "covering", "transforms", "check")


class UsageError(DomainError):
    """Malformed command line or configuration."""


# --------------------------------------------------------------------------
# schemas


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    with resources.files("equidist").joinpath("schemas", name).open() as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def _registry() -> Registry:
    names = ("run_config.json", "envelope.json", "variance_report.json", "identity_check.json")
    return Registry().with_resources((n, Resource.from_contents(load_schema(n))) for n in names)


def validator(name: str) -> Draft202012Validator:
    return Draft202012Validator(load_schema(name), registry=_registry())


def _error_key(err: jsonschema.ValidationError) -> str:
    path = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        path.append(err.message.split("'")[1])
    elif err.validator == "additionalProperties":
        extra = err.message.split("'")
        if len(extra) > 1:
            path.append(extra[1])
    return ".".join(path) or "<root>"


def validate(instance, schema_name: str) -> None:
    """Raise UsageError naming the offending key on the deepest schema violation."""
    errs = list(validator(schema_name).iter_errors(instance))
    if errs:
        err = jsonschema.exceptions.best_match(errs)
        raise UsageError(f"invalid value for '{_error_key(err)}': {err.message}")


# --------------------------------------------------------------------------
# config


def resolve_output(command: str, fmt: str, output: str | None) -> str:
    if output:
        return output
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return str(Path(base) / f"{command}.{fmt}")
    return "-"


def make_config(command: str, parameters: dict, seed: int = 0, stream: int = 0, fmt: str = "json", output: str | None = None) -> dict:
    config = {
        "command": command,
        "parameters": parameters,
        "seed": int(seed),
        "stream": int(stream),
        "output_path": resolve_output(command, fmt, output),
        "format": fmt,
    }
    validate(config, "run_config.json")
    return config


def _parse_freq(x):
    if isinstance(x, str):
        s = x.strip().replace(" ", "")
        if s in ("i/2", "0.5i", "0.5j"):
            return 0.5j
        try:
            return float(s)
        except ValueError:
            raise UsageError(f"invalid value for 'grid': {x!r} is neither a number nor i/2") from None
    return x


def _parse_annulus(text: str):
    try:
        r, R = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"annulus must look like r:R, got {text!r}") from None
    return [r, R]


# --------------------------------------------------------------------------
# commands; each returns (result dict, csv header, csv rows, exit code)


def _threads(p):
    return int(p.get("threads", 1))


def cmd_enumerate(p, src):
    pts = lattice.enumerate_points(p["n"])
    rows = list(pts.csv_rows())
    result = {"n": pts.n, "count": len(pts), "points": pts.points, "unit_points": pts.unit_points}
    return result, lattice.CSV_HEADER, rows, EXIT_OK


def cmd_forms(p, src):
    out, rows = [], []
    for D in p["D"]:
        ens = modular.FormClassEnsemble.build(D)
        log.info("D = %d: %d classes", D, ens.class_number)
        rows.extend(modular.forms_rows(ens))
        entry = {
            "D": ens.D.value,
            "class_number": ens.class_number,
            "class_number_formula": ens.class_number_formula(),
            "forms": [[f.a, f.b, f.c] for f in ens.forms],
        }
        if ens.D.value < 0:
            entry["heegner_points"] = [[z.real, z.imag] for z in ens.heegner_points]
        else:
            entry["geodesics"] = [{"endpoints": list(g.endpoints), "length": g.length} for g in ens.geodesics]
        out.append(entry)
    return {"ensembles": out}, modular.FORMS_HEADER, rows, EXIT_OK


def cmd_geodesics(p, src):
    out, rows = [], []
    for D in p["D"]:
        if D <= 0:
            raise DomainError(f"geodesics need D > 0, got {D}")
        ens = modular.FormClassEnsemble.build(D)
        rows.extend(modular.geodesic_rows(ens))
        total = ens.total_length
        formula = 2 * math.sqrt(D) * L1_chi(D)
        out.append({
            "D": D,
            "narrow_class_number": ens.class_number,
            "lengths": [g.length for g in ens.geodesics],
            "total_length": total,
            "formula": formula,
            "rel_err": abs(total - formula) / formula,
        })
    return {"discriminants": out}, modular.GEODESICS_HEADER, rows, EXIT_OK


def cmd_variance(p, src):
    reports = []
    for obj in p["ids"]:
        for r, R in p["annuli"]:
            log.info("variance: %s %d annulus [%g, %g]", p["space"], obj, r, R)
            rep = variance.brs_report(obj, r, R, p["samples"], p["lmax"] or None, src, space=p["space"], threads=_threads(p))
            reports.append(rep.to_dict())
    for rep in reports:
        validate(_plain(rep), "variance_report.json")
    rows = [tuple(rep[k] for k in ("id", "r", "R", "mc_estimate", "mc_stderr", "spectral_estimate",
                                   "spectral_tail_bound", "prediction", "ratio_mc", "ratio_spectral")) for rep in reports]
    return {"reports": reports}, variance.AGGREGATE_HEADER, rows, EXIT_OK


def cmd_linnik(p, src):
    mode = p["mode"]
    if mode == "scan":
        res = lattice.linnik_scan(p["lo"], p["hi"], p["delta"])
        bound = res["n"].astype(float) ** (0.5 - p["delta"])
        rows = list(zip(res["n"].tolist(), res["min_x3"].tolist(), bound.tolist()))
        summary = {k: v for k, v in res.items() if k not in ("n", "min_x3")}
        return summary, ("n", "min_x3", "bound"), rows, EXIT_OK
    if mode == "min":
        w = p.get("w", [0.0, 0.0, 1.0])
        val = lattice.linnik_min(p["n"], w)
        return {"n": p["n"], "w": w, "min": val}, ("n", "min"), [(p["n"], val)], EXIT_OK
    val, se = lattice.rotated_linnik_measure(p["n"], p["psi"], p["samples"], seed=src.seed, stream=src.stream)
    res = {"n": p["n"], "psi": p["psi"], "samples": p["samples"], "measure": val, "stderr": se}
    return res, ("n", "psi", "samples", "measure", "stderr"), [(p["n"], p["psi"], p["samples"], val, se)], EXIT_OK


def cmd_covering(p, src):
    out = [lattice.covering_radius(n, p["grid_resolution"]) for n in p["n"]]
    header = ("n", "estimate", "lower", "upper", "grid_resolution", "grid_size")
    rows = [tuple(c[k] for k in header) for c in out]
    return {"covering": out}, header, rows, EXIT_OK


def cmd_transforms(p, src):
    grid = [_parse_freq(x) for x in p["grid"]]
    prof = transforms.build_profile(p["space"], p["r"], p["R"], grid)
    rows = list(prof.rows())
    result = {
        "space": prof.space,
        "r": prof.r,
        "R": prof.R,
        "rows": [dict(zip(transforms.PROFILE_HEADER, row)) for row in rows],
        "decay_constants": prof.decay_constants(),
    }
    return result, transforms.PROFILE_HEADER, rows, EXIT_OK


CHECK_HEADER = ("name", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_diff", "tolerance", "pass")


def cmd_check(p, src):
    checks, rows, summary = [], [], {}
    for name in p["suites"]:
        log.info("check: running suite %s", name)
        results = list(identities.SUITES[name]())
        npass = sum(c.passed for c in results)
        summary[name] = {"cases": len(results), "passed": npass}
        log.info("check: %s %d/%d passed", name, npass, len(results))
        for c in results:
            d = c.to_dict()
            d["suite"] = name
            checks.append(d)
            rows.append((c.name, d["lhs"].real, d["lhs"].imag, d["rhs"].real, d["rhs"].imag, c.abs_diff, c.tolerance, c.passed))
    for d in checks:
        validate(_plain({k: v for k, v in d.items() if k != "suite"}), "identity_check.json")
    ok = all(s["passed"] == s["cases"] for s in summary.values())
    return {"summary": summary, "all_pass": ok, "checks": checks}, CHECK_HEADER, rows, EXIT_OK if ok else EXIT_IDENTITY


HANDLERS = {
    "enumerate": cmd_enumerate,
    "forms": cmd_forms,
    "geodesics": cmd_geodesics,
    "variance": cmd_variance,
    "linnik": cmd_linnik,
    "covering": cmd_covering,
    "transforms": cmd_transforms,
    "check": cmd_check,
}


def _plain(obj):
    """JSON round trip through the package encoder (numpy and complex to plain types)."""
    return json.loads(dumps(obj))


# --------------------------------------------------------------------------
# run


def render(config: dict, result: dict, header, rows) -> str:
    if config["format"] == "json":
        return dumps({"config": config, "result": result})
    line = "# config: " + json.dumps(_plain(config), sort_keys=False, separators=(",", ":"))
    return line + "\n" + csv_text(header, rows)


def execute(config: dict) -> tuple[int, str]:
    """Run a validated RunConfig; returns (exit code, rendered output)."""
    validate(config, "run_config.json")
    src = RandomSource(config["seed"], config["stream"])
    result, header, rows, code = HANDLERS[config["command"]](config["parameters"], src)
    return code, render(config, result, header, rows)


def write_output(config: dict, text: str) -> None:
    path = config["output_path"]
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)
    log.info("wrote %s", target)


def run(config: dict) -> int:
    """Execute a RunConfig and write its artifact; returns the process exit code."""
    try:
        code, text = execute(config)
    except ResourceCapError as exc:
        log.error("resource cap: %s", exc)
        return EXIT_CAP
    except DomainError as exc:
        log.error("domain error: %s", exc)
        return EXIT_DOMAIN
    write_output(config, text)
    return code


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(sp):
    sp.add_argument("--seed", type=int, default=0, help="64-bit seed for all random draws")
    sp.add_argument("--stream", type=int, default=0, help="random stream id")
    sp.add_argument("--format", choices=("csv", "json"), default="json")
    sp.add_argument("--output", "-o", default=None, help=f"output file ('-' for stdout; default ${OUTPUT_DIR_ENV}/<command>.<format> or stdout)")
    sp.add_argument("--threads", type=int, default=1, help="worker cap for internal parallelism")
    sp.add_argument("--quiet", "-q", action="store_true", help="suppress progress on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="equidist", description="Equidistribution experiments for lattice points, Heegner points and closed geodesics.")
    parser.add_argument("--config", help="replay a RunConfig JSON file (or an output envelope)")
    parser.add_argument("--quiet", "-q", dest="quiet_top", action="store_true", help="suppress progress on stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("enumerate", help="integer points on x1^2+x2^2+x3^2 = n")
    sp.add_argument("--n", type=int, required=True)
    _common(sp)

    for name, hlp in (("forms", "reduced forms, Heegner points or geodesics of discriminant D"),
                      ("geodesics", "closed geodesics and the total length identity, D > 0")):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("--D", type=int, nargs="+", required=True)
        _common(sp)

    sp = sub.add_parser("variance", help="variance reports (Monte Carlo and spectral)")
    sp.add_argument("--space", choices=("sphere", "hyperbolic"), default="sphere")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--n", type=int, nargs="+", dest="ids")
    grp.add_argument("--D", type=int, nargs="+", dest="ids_D")
    sp.add_argument("--r", type=float)
    sp.add_argument("--R", type=float)
    sp.add_argument("--annulus", type=_parse_annulus, action="append", help="r:R, repeatable")
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("--lmax", type=int, default=400, help="spectral cutoff; 0 disables the spectral route")
    sp.add_argument("--centers", choices=("haar", "rotation"), default="haar")
    _common(sp)

    sp = sub.add_parser("linnik", help="minimal coordinate scans and rotated Linnik measure")
    sp.add_argument("--mode", choices=("scan", "min", "rotated"), default="scan")
    sp.add_argument("--lo", type=int)
    sp.add_argument("--hi", type=int)
    sp.add_argument("--delta", type=float, default=1.0 / 18)
    sp.add_argument("--n", type=int)
    sp.add_argument("--w", type=float, nargs=3)
    sp.add_argument("--psi", type=float)
    sp.add_argument("--samples", type=int)
    _common(sp)

    sp = sub.add_parser("covering", help="covering radius of the normalized points")
    sp.add_argument("--n", type=int, nargs="+", required=True)
    sp.add_argument("--grid-resolution", type=float, default=0.01)
    _common(sp)

    sp = sub.add_parser("transforms", help="transform profile CSV")
    sp.add_argument("--space", choices=("sphere", "hyperbolic"), required=True)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--R", type=float, required=True)
    sp.add_argument("--grid", nargs="+", required=True, help="frequencies; 'i/2' allowed for hyperbolic")
    _common(sp)

    sp = sub.add_parser("check", help="run identity suites")
    sp.add_argument("--suite", action="append", choices=tuple(identities.SUITES) + ("all",), required=True)
    _common(sp)
    return parser


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def parameters_from_args(args) -> dict:
    c = args.command
    base = {"threads": args.threads}
    if c == "enumerate":
        p = {"n": args.n}
    elif c in ("forms", "geodesics"):
        p = {"D": args.D}
    elif c == "variance":
        annuli = list(args.annulus or [])
        if args.r is not None or args.R is not None:
            if args.r is None or args.R is None:
                raise UsageError("invalid value for 'annuli': --r and --R must be given together")
            annuli.insert(0, [args.r, args.R])
        if not annuli:
            raise UsageError("invalid value for 'annuli': give --r/--R or --annulus r:R")
        ids = args.ids if args.ids is not None else args.ids_D
        p = {"space": args.space, "ids": ids, "annuli": annuli, "samples": args.samples,
             "lmax": args.lmax if args.space == "sphere" else 0, "centers": args.centers}
    elif c == "linnik":
        p = _drop_none({"mode": args.mode, "lo": args.lo, "hi": args.hi, "n": args.n, "w": args.w,
                        "psi": args.psi, "samples": args.samples})
        if args.mode == "scan":
            p["delta"] = args.delta
    elif c == "covering":
        p = {"n": args.n, "grid_resolution": args.grid_resolution}
    elif c == "transforms":
        grid = []
        for g in args.grid:
            v = _parse_freq(g)
            grid.append("i/2" if isinstance(v, complex) else v)
        p = {"space": args.space, "r": args.r, "R": args.R, "grid": grid}
    else:
        suites = list(identities.SUITES) if "all" in args.suite else list(dict.fromkeys(args.suite))
        p = {"suites": suites}
    p.update(base)
    return p


def config_from_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid value for 'config': {exc}") from None
    if isinstance(data, dict) and "config" in data and "result" in data:
        data = data["config"]
    validate(data, "run_config.json")
    return data


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    quiet = "--quiet" in argv or "-q" in argv
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.config:
            config = config_from_file(args.config)
        elif args.command is None:
            raise UsageError("missing command; choose one of " + ", ".join(COMMANDS))
        else:
            config = make_config(args.command, parameters_from_args(args), args.seed, args.stream, args.format, args.output)
    except UsageError as exc:
        log.error("usage: %s", exc)
        return EXIT_DOMAIN
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
