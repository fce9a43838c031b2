"""Command-line front end.

Subcommands::

    validate <file>                      Delzant + zero-sum report
    divergence <file> --points <file>   divergence table for point pairs
    geodesic <file> --spec <file>       geodesic trace (CSV rows t, x, y)
    boundary <file> --face <indices> --points <file>
                                        face divergence table
    pythagoras <file> --triple <file>   boundary Pythagoras report
    torify <file>                       mixture family <-> polytope dictionary
    verify-all <scenario-file>          full verification sweep

Global flags: --format {json,csv}, --seed N, --tol name=value (repeatable),
--out PATH.  Exit codes: 0 success / all checks pass, 1 failed checks,
2 malformed input or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import jsonio
from .boundary import (
    boundary_divergence,
    boundary_point,
    project_to_face,
    pythagoras_boundary_foot,
    pythagoras_interior_foot,
)
from .dually_flat import (
    GeodesicSpec,
    bregman,
    dual_geodesic_limit,
    geodesic_point,
    to_dual,
)
from .errors import DomainError, PolyflatError
from .mixture import from_mixture, to_mixture, zero_sum_check
from .polytope import face_chart, validate_delzant
from .verify import run_scenario


def _add_common(parser):
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="polyflat", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="Delzant and zero-sum validation")
    p.add_argument("file")
    _add_common(p)

    p = sub.add_parser("divergence", help="divergence table for point pairs")
    p.add_argument("file")
    p.add_argument("--points", required=True)
    _add_common(p)

    p = sub.add_parser("geodesic", help="trace a geodesic")
    p.add_argument("file")
    p.add_argument("--spec", required=True)
    _add_common(p)

    p = sub.add_parser("boundary", help="face divergence table")
    p.add_argument("file")
    p.add_argument("--face", required=True, help="comma-separated facet indices (1-based)")
    p.add_argument("--points", required=True)
    _add_common(p)

    p = sub.add_parser("pythagoras", help="boundary Pythagoras report")
    p.add_argument("file")
    p.add_argument("--triple", required=True)
    _add_common(p)

    p = sub.add_parser("torify", help="mixture family <-> polytope dictionary")
    p.add_argument("file")
    _add_common(p)

    p = sub.add_parser("verify-all", help="run a verification scenario")
    p.add_argument("scenario")
    _add_common(p)
    return parser


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _parse_tols(pairs):
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise PolyflatError(f"--tol expects NAME=VALUE, got {pair!r}")
        name, value = pair.split("=", 1)
        out[name.strip()] = float(value)
    return out


def _load_problem(path):
    """A polytope, and a potential when the file carries one."""
    data = _load_json(path)
    if "polytope" in data:
        P = jsonio.parse_polytope(data["polytope"])
        phi = jsonio.parse_potential(data["potential"], P) if "potential" in data else None
        return P, phi
    return jsonio.parse_polytope(data), None


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows, notes=()):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [jsonio.format_float(v) if isinstance(v, float) else v for v in row]
        )
    for note in notes:
        buf.write(f"# {note}\n")
    return buf.getvalue()


def cmd_validate(args):
    P, _ = _load_problem(args.file)
    report = validate_delzant(P)
    payload = {"delzant": report.as_dict(), "zero_sum": zero_sum_check(P)}
    if args.format == "json":
        _emit(jsonio.dumps(payload), args.out)
    else:
        rows = [
            ("simple", report.simple),
            ("rational", report.rational),
            ("smooth", report.smooth),
            ("partial", report.partial),
            ("valid", report.valid),
            ("zero_sum", payload["zero_sum"]),
        ]
        _emit(_csv_text(("property", "value"), rows), args.out)
    return 0 if report.valid else 1


def cmd_divergence(args):
    P, phi = _load_problem(args.file)
    if phi is None:
        raise PolyflatError("input file must carry a potential")
    pairs = _load_json(args.points)["pairs"]
    rows = []
    for a, b in pairs:
        rows.append((list(map(float, a)), list(map(float, b)), bregman(phi, a, b)))
    if args.format == "json":
        payload = {"rows": [{"xi": a, "xi2": b, "divergence": d} for a, b, d in rows]}
        _emit(jsonio.dumps(payload), args.out)
    else:
        n = P.dim
        header = [f"xi_{i+1}" for i in range(n)] + [f"xi2_{i+1}" for i in range(n)] + ["divergence"]
        _emit(_csv_text(header, [(*a, *b, d) for a, b, d in rows]), args.out)
    return 0


def cmd_geodesic(args):
    P, phi = _load_problem(args.file)
    if phi is None:
        raise PolyflatError("input file must carry a potential")
    spec_data = _load_json(args.spec)
    spec = GeodesicSpec(
        kind=spec_data["kind"],
        start=tuple(float(v) for v in spec_data["start"]),
        direction=tuple(float(v) for v in spec_data["direction"]),
    )
    t_grid = [float(t) for t in spec_data.get("t_grid", [0.0, 0.5, 1.0, 2.0, 5.0])]
    rows = []
    notes = []
    for t in t_grid:
        try:
            x = geodesic_point(phi, P, spec, t)
        except DomainError as exc:
            notes.append(str(exc))
            break
        pair = to_dual(phi, x)
        rows.append((t, list(pair.x), list(pair.y)))
    limit = None
    if spec.kind == "dual" and P.bounded:
        limit = dual_geodesic_limit(phi, P, spec)
    if args.format == "json":
        payload = {
            "rows": [{"t": t, "x": x, "y": y} for t, x, y in rows],
            "limit": limit.as_dict() if limit else None,
            "notes": notes,
        }
        _emit(jsonio.dumps(payload), args.out)
    else:
        n = P.dim
        header = ["t"] + [f"x_{i+1}" for i in range(n)] + [f"y_{i+1}" for i in range(n)]
        csv_rows = [(t, *x, *y) for t, x, y in rows]
        if limit is not None:
            csv_rows.append(("inf", *limit.point, *([""] * n)))
            notes.append(f"limit_face={','.join(map(str, limit.face))}")
        _emit(_csv_text(header, csv_rows, notes), args.out)
    return 0


def _parse_face(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def cmd_boundary(args):
    P, phi = _load_problem(args.file)
    if phi is None:
        raise PolyflatError("input file must carry a potential")
    chart = face_chart(P, _parse_face(args.face))
    pairs = _load_json(args.points)["pairs"]
    rows = []
    for a, b in pairs:
        eta = boundary_point(chart, ambient=a)
        eta2 = boundary_point(chart, ambient=b)
        rows.append((list(map(float, a)), list(map(float, b)),
                     boundary_divergence(phi, chart, eta, eta2)))
    if args.format == "json":
        payload = {
            "face": list(chart.face_active),
            "rows": [{"eta": a, "eta2": b, "divergence": d} for a, b, d in rows],
        }
        _emit(jsonio.dumps(payload), args.out)
    else:
        n = P.dim
        header = [f"eta_{i+1}" for i in range(n)] + [f"eta2_{i+1}" for i in range(n)] + ["divergence"]
        _emit(_csv_text(header, [(*a, *b, d) for a, b, d in rows]), args.out)
    return 0


def cmd_pythagoras(args):
    P, phi = _load_problem(args.file)
    if phi is None:
        raise PolyflatError("input file must carry a potential")
    triple = _load_json(args.triple)
    chart = face_chart(P, triple["face"])
    kind = triple.get("kind", "boundary_foot")
    tols = _parse_tols(args.tol)
    if kind == "boundary_foot":
        eta = boundary_point(chart, ambient=triple["eta"])
        xi2 = np.asarray(triple["xi"], dtype=float)
        if "eta_prime" in triple and triple["eta_prime"] is not None:
            foot = boundary_point(chart, ambient=triple["eta_prime"])
        else:
            foot = project_to_face(phi, chart, xi2)
        report = pythagoras_boundary_foot(
            phi, chart, eta, foot, xi2, tolerance=tols.get("boundary_foot", 1e-8)
        )
        extra = {"eta_prime": list(foot.ambient)}
    elif kind == "interior_foot":
        eta = boundary_point(chart, ambient=triple["eta"])
        report = pythagoras_interior_foot(
            phi, chart, eta, triple["xi"], triple["xi_prime"],
            tolerance=tols.get("interior_identity", 1e-9),
        )
        extra = {}
    else:
        raise PolyflatError(f"unknown pythagoras kind {kind!r}")
    payload = {"kind": kind, **report.as_dict(), **extra}
    if args.format == "json":
        _emit(jsonio.dumps(payload), args.out)
    else:
        rows = sorted((k, v) for k, v in payload.items() if not isinstance(v, (list, dict)))
        _emit(_csv_text(("field", "value"), rows), args.out)
    return 0 if report.passed else 1


def cmd_torify(args):
    data = _load_json(args.file)
    if "alphas" in data:
        theta = jsonio.parse_mixture(data)
        report = from_mixture(theta)
        payload = report.as_dict()
        ok = report.torifiable
    else:
        P = jsonio.parse_polytope(data.get("polytope", data))
        payload = {"zero_sum": zero_sum_check(P), "delzant": validate_delzant(P).as_dict()}
        ok = payload["zero_sum"] and payload["delzant"]["valid"]
        if ok:
            payload["mixture"] = to_mixture(P).as_dict()
        payload["pass"] = ok
    if args.format == "json":
        _emit(jsonio.dumps(payload), args.out)
    else:
        _emit(_csv_text(("field", "value"), [("pass", ok)]), args.out)
    return 0 if ok else 1


def cmd_verify_all(args):
    data = _load_json(args.scenario)
    scenarios = data if isinstance(data, list) else [data]
    tols = _parse_tols(args.tol)
    all_payload = []
    all_ok = True
    for sc in scenarios:
        P = jsonio.parse_polytope(sc["polytope"])
        phi = jsonio.parse_potential(sc.get("potential", {"guillemin_of": "polytope"}), P)
        results, ok = run_scenario(
            P,
            phi,
            name=sc.get("name", "scenario"),
            faces=sc.get("faces"),
            samples=sc.get("samples"),
            tolerances={**sc.get("tolerances", {}), **tols},
            seed=args.seed,
            product_check=sc.get("product_check", True),
            negative_control=sc.get("negative_control", False),
        )
        all_ok = all_ok and ok
        all_payload.append(
            {
                "scenario": sc.get("name", "scenario"),
                "seed": args.seed,
                "checks": [r.as_dict() for r in results],
                "pass": ok,
            }
        )
    payload = all_payload[0] if len(all_payload) == 1 else {"scenarios": all_payload, "pass": all_ok}
    if args.format == "json":
        _emit(jsonio.dumps(payload), args.out)
    else:
        rows = []
        for sc_payload in all_payload:
            for check in sc_payload["checks"]:
                rows.append(
                    (
                        sc_payload["scenario"],
                        check["check"],
                        float(check["residual"]),
                        float(check["tolerance"]),
                        check["pass"],
                    )
                )
        _emit(_csv_text(("scenario", "check", "residual", "tolerance", "pass"), rows), args.out)
    return 0 if all_ok else 1


_HANDLERS = {
    "validate": cmd_validate,
    "divergence": cmd_divergence,
    "geodesic": cmd_geodesic,
    "boundary": cmd_boundary,
    "pythagoras": cmd_pythagoras,
    "torify": cmd_torify,
    "verify-all": cmd_verify_all,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (OSError, json.JSONDecodeError, PolyflatError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
