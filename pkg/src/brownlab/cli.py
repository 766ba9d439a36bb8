"""Command-line front end.

Exit codes: 0 when every checked property holds, 1 when a mathematical
check fails, 2 for usage or input errors. Reports are deterministic for a
fixed configuration and seed (sorted keys, no timestamps).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from contextlib import contextmanager
from typing import IO, Any, Iterator

from . import __version__
from .certify import DEFAULT_DEPTH, DEFAULT_TOL, brownian_certificate, covariance_bounds, norm_bound
from .converge import THRESHOLD, covariance_track, default_probes, iter_deviations, normalize_mode, weak_pairs
from .dsl import DSLError, load
from .families import FAMILY_NAMES, canonical_bishop_family, family_handle, family_operator, power_envelope
from .operators import BlockUpper

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CLI_MODES = ("weak", "strong", "star", "norm")


class UsageError(Exception):
    pass


_SQRT = re.compile(r"^sqrt\((.+)\)$")


def parse_value(text: str) -> Any:
    """``--param`` values: integers, reals, ``sqrt(x)``, or bare strings."""
    t = text.strip()
    m = _SQRT.match(t)
    if m:
        x = parse_value(m.group(1))
        if not isinstance(x, (int, float)) or x < 0:
            raise UsageError(f"sqrt needs a nonnegative number, got {m.group(1)!r}")
        return math.sqrt(x)
    for cast in (int, float):
        try:
            v = cast(t)
        except ValueError:
            continue
        if isinstance(v, float) and not math.isfinite(v):
            raise UsageError(f"non-finite parameter value {text!r}")
        return v
    return t


def parse_real(text: str) -> float:
    """``--sigma`` values: a real number or ``sqrt(x)``."""
    try:
        v = parse_value(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if isinstance(v, str):
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}")
    return float(v)


def parse_params(items: list[str]) -> dict:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--param expects k=v, got {item!r}")
        out[key.strip()] = parse_value(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--spec", metavar="FILE", help="operator DSL document (JSON)")
    src.add_argument("--family", metavar="NAME", choices=FAMILY_NAMES, help="named family")
    common.add_argument("--param", metavar="K=V", action="append", default=[], help="family parameter (repeatable)")
    common.add_argument("--sigma", type=parse_real, help="covariance to certify against")
    common.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="number of basis vectors tested")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance")
    common.add_argument("--nmax", type=int, default=64, help="largest sequence index")
    common.add_argument("--mode", choices=CLI_MODES, help="convergence seminorm (default: family's claim)")
    common.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for random probes")

    p = argparse.ArgumentParser(prog="brownlab", description="2-isometry and Brownian unitary lab.")
    p.add_argument("--version", action="version", version=f"brownlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("certify", parents=[common], help="Brownian-unitary certificate of one operator")
    sub.add_parser("converge", parents=[common], help="deviation table of a family against its limit")
    sub.add_parser("bishop", parents=[common], help="Bishop approximants of a restricted canonical Brownian unitary")
    sub.add_parser("powers", parents=[common], help="norms of the corner of T^n for a block operator")
    sub.add_parser("demo", parents=[common], help="small fixed tour of the library")
    return p


def validate(args) -> dict:
    if args.depth < 1:
        raise UsageError("--depth must be >= 1")
    if args.nmax < 1:
        raise UsageError("--nmax must be >= 1")
    if not args.tol > 0:
        raise UsageError("--tol must be > 0")
    if args.sigma is not None and not (args.sigma >= 0 and math.isfinite(args.sigma)):
        raise UsageError("--sigma must be a finite number >= 0")
    params = parse_params(args.param)
    if args.family and args.sigma is not None:
        # --sigma doubles as the family's covariance parameter unless given explicitly
        params.setdefault("sigma", args.sigma)
    return {
        "command": args.command,
        "spec": args.spec,
        "family": args.family,
        "param": list(args.param),
        "params": params,
        "sigma": args.sigma,
        "depth": args.depth,
        "tol": args.tol,
        "nmax": args.nmax,
        "mode": args.mode,
        "format": args.format,
        "seed": args.seed,
    }


@contextmanager
def _sink(path: str | None) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _dump(report: dict, fh: IO[str]) -> None:
    json.dump(report, fh, sort_keys=True, indent=2, allow_nan=False)
    fh.write("\n")


def _envelope(cfg: dict) -> dict:
    shown = {k: v for k, v in cfg.items() if k != "out"}
    return {"tool": "brownlab", "version": __version__, "config": shown}


def _resolve_operator(cfg: dict, spec_doc_out: dict):
    if cfg["spec"]:
        op, doc = load(cfg["spec"])
        spec_doc_out["spec_document"] = doc
        return op, None
    if cfg["family"]:
        try:
            return family_operator(cfg["family"], cfg["params"])
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"family {cfg['family']}: {exc}") from None
    raise UsageError("give --spec FILE or --family NAME")


def _json_only(cfg: dict) -> None:
    if cfg["format"] != "json":
        raise UsageError(f"{cfg['command']} writes JSON only")


def run_certify(cfg: dict, out: str | None) -> int:
    _json_only(cfg)
    report = _envelope(cfg)
    op, claimed = _resolve_operator(cfg, report)
    sigma = cfg["sigma"] if cfg["sigma"] is not None else claimed
    if sigma is None:
        raise UsageError("--sigma is required with --spec")
    if not op.is_square:
        raise UsageError("certify needs an operator on a single space")
    cert = brownian_certificate(op, sigma, cfg["depth"], cfg["tol"])
    report["certificate"] = cert.to_json()
    report["norm"] = norm_bound(op, cfg["depth"]).to_json()
    report["failed"] = cert.failed_conditions()
    with _sink(out) as fh:
        _dump(report, fh)
    return EXIT_PASS if cert.passed else EXIT_FAIL


def _family(cfg: dict):
    if not cfg["family"]:
        raise UsageError(f"{cfg['command']} needs --family NAME")
    try:
        return family_handle(cfg["family"], cfg["params"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"family {cfg['family']}: {exc}") from None


def run_converge(cfg: dict, out: str | None) -> int:
    fam = _family(cfg)
    mode = normalize_mode(cfg["mode"] or fam.claimed_mode)
    probes = default_probes(fam.space, cfg["seed"])
    if mode == "weak":
        probes = weak_pairs(probes)
    settled: dict[str, int | None] = {p.id: None for p in probes}

    def note(row):
        if row.deviation <= THRESHOLD:
            if settled[row.probe_id] is None:
                settled[row.probe_id] = row.n
        else:
            settled[row.probe_id] = None

    rows = iter_deviations(fam, mode, probes, cfg["nmax"])
    if cfg["format"] == "csv":
        with _sink(out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "probe_id", "deviation"])
            for row in rows:
                note(row)
                w.writerow([row.n, row.probe_id, repr(row.deviation)])
        track = covariance_track(fam, cfg["nmax"], cfg["depth"], cfg["tol"])
    else:
        table = []
        for row in rows:
            note(row)
            table.append({"n": row.n, "probe_id": row.probe_id, "deviation": row.deviation, "bound": row.bound})
        track = covariance_track(fam, cfg["nmax"], cfg["depth"], cfg["tol"])
        report = _envelope(cfg)
        report.update(
            {
                "family": fam.name,
                "family_params": fam.params,
                "mode": mode,
                "threshold": THRESHOLD,
                "probes": {p.id: _probe_json(p) for p in probes},
                "rows": table,
                "first_settled": settled,
                "cov_track": track.to_json()["cov_track"],
                "lsc_flag": track.lsc_flag,
                "lsc_applicable": track.lsc_applicable,
            }
        )
        report["passed"] = all(v is not None for v in settled.values()) and not track.lsc_flag
        with _sink(out) as fh:
            _dump(report, fh)
    ok = all(v is not None for v in settled.values()) and not track.lsc_flag
    return EXIT_PASS if ok else EXIT_FAIL


def _probe_json(p) -> dict:
    if p.g is None:
        return p.f.to_json()
    return {"f": p.f.to_json(), "g": p.g.to_json()}


def run_bishop(cfg: dict, out: str | None) -> int:
    _json_only(cfg)
    sigma = 1.0 if cfg["sigma"] is None else cfg["sigma"]
    if sigma <= 0:
        raise UsageError("bishop needs --sigma > 0")
    fam = canonical_bishop_family(sigma)
    t = fam.limit
    probes = default_probes(t.domain, cfg["seed"])
    members = []
    ok = True
    for n in range(1, cfg["nmax"] + 1):
        tn = fam.member(n)
        cert = brownian_certificate(tn, sigma, cfg["depth"], cfg["tol"])
        tau = t.domain.labels(n)
        fixed = max((tn.col(lab) - t.col(lab)).norm() for lab in tau)
        devs = {p.id: (tn.apply(p.f) - t.apply(p.f)).norm() for p in probes}
        members.append({"n": n, "tau_residual": fixed, "cov": cert.cov.to_json(), "certificate_passed": cert.passed, "strong_deviation": devs})
        ok &= cert.passed and fixed == 0.0
    final = members[-1]["strong_deviation"]
    converged = all(v <= THRESHOLD for v in final.values())
    report = _envelope(cfg)
    report.update({"sigma": sigma, "subspace": fam.params["subspace"], "threshold": THRESHOLD, "members": members, "converged": converged})
    report["passed"] = bool(ok and converged)
    with _sink(out) as fh:
        _dump(report, fh)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def run_powers(cfg: dict, out: str | None) -> int:
    _json_only(cfg)
    report = _envelope(cfg)
    op, _ = _resolve_operator(cfg, report)
    if not isinstance(op, BlockUpper):
        raise UsageError("powers needs an operator built by block_upper")
    rows = []
    ok = True
    for n in range(1, cfg["nmax"] + 1):
        pe = power_envelope(op, n, cfg["depth"])
        agree = pe.E_norm_matrix is None or abs(pe.E_norm - pe.E_norm_matrix) <= cfg["tol"]
        ok &= agree
        rows.append({"n": n, "E_norm": pe.E_norm, "E_norm_sq": pe.E_norm**2, "E_norm_matrix": pe.E_norm_matrix, "method": pe.method, "agree": agree})
    report["rows"] = rows
    report["passed"] = bool(ok)
    with _sink(out) as fh:
        _dump(report, fh)
    return EXIT_PASS if ok else EXIT_FAIL


def run_demo(cfg: dict, out: str | None) -> int:
    """A fixed tour; each line states what is expected and whether it held."""
    _json_only(cfg)
    depth = min(cfg["depth"], 32)
    checks = []

    def check(name, expected, observed, holds):
        checks.append({"check": name, "expected": expected, "observed": observed, "holds": bool(holds)})

    op, _ = family_operator("canonical", {"sigma": 2.0})
    c = brownian_certificate(op, 2.0, depth)
    check("canonical sigma=2 certifies", "pass", "pass" if c.passed else "fail", c.passed)
    op, _ = family_operator("js01", {"lambda": math.sqrt(2.0)})
    c = brownian_certificate(op, 1.0, depth)
    check("js01 lambda=sqrt(2) at sigma=1: condition iii defect", 0.25, c.res_iii, abs(c.res_iii - 0.25) <= 1e-12)
    op, _ = family_operator("prz1", {"sigma": 2.0, "n": "limit"})
    cov = covariance_bounds(op, depth)
    check("prz1 limit covariance", [0.0, 0.0], [cov.lower, cov.upper], cov.upper <= 1e-12)
    op, _ = family_operator("clidr", {"q": 0.5})
    pe = power_envelope(op, 4, depth)
    check("clidr q=1/2: |E_4|^2", 1 - 0.5**4, pe.E_norm**2, abs(pe.E_norm**2 - (1 - 0.5**4)) <= 1e-10)
    report = _envelope(cfg)
    report["checks"] = checks
    report["passed"] = all(x["holds"] for x in checks)
    with _sink(out) as fh:
        _dump(report, fh)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


COMMANDS = {"certify": run_certify, "converge": run_converge, "bishop": run_bishop, "powers": run_powers, "demo": run_demo}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        cfg = validate(args)
        return COMMANDS[args.command](cfg, args.out)
    except DSLError as exc:
        print(f"brownlab: malformed operator document at {exc}", file=sys.stderr)
    except UsageError as exc:
        print(f"brownlab: {exc}", file=sys.stderr)
    except (ValueError, TypeError) as exc:
        print(f"brownlab: invalid input: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
