"""Command-line interface.

Verbs: build, dimension, spectrum, distance, measure, compare, report.
Exit codes: 0 success, 1 computation error, 2 usage error.  The env var
GASKET_MAX_EDGES overrides the construction resource cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from gasketlab import measure, metric, spectrum, svg
from gasketlab.expr import TestFunction
from gasketlab.geometry import GasketError, build_model
from gasketlab.serialize import format_number, write_model


class UsageError(GasketError):
    """Bad flag combination; maps to exit code 2."""


def _require_alpha(args) -> Optional[float]:
    if args.variant == "stretched":
        if args.alpha is None:
            raise UsageError("--alpha is required for the stretched variant")
        return args.alpha
    if args.alpha is not None:
        raise UsageError(f"--alpha does not apply to the {args.variant} variant")
    return None


def _parse_point(text: str) -> tuple[float, float]:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad point {text!r}; expected 'x,y'") from None
    if len(parts) != 2:
        raise UsageError(f"bad point {text!r}; expected 'x,y'")
    return parts[0], parts[1]


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    alpha = _require_alpha(args)
    model = build_model(args.variant, args.level, alpha,
                        harmonic_depth=args.depth)
    write_model(model, args.out)
    if args.svg:
        svg.emit_svg(model, args.svg)
    return 0


def cmd_dimension(args) -> int:
    alpha = _require_alpha(args)
    if args.variant == "sg":
        est = spectrum.spectral_dimension(spectrum.sg_length_spectrum())
        print(format_number(est.lower))
        return 0
    if args.variant == "stretched":
        value = spectrum.stretched_dimension(alpha)
        print(format_number(value))
        if args.bracket:
            lo, hi = spectrum.abscissa_bracket(
                spectrum.stretched_length_spectrum(alpha), tol=args.tol
            )
            print(f"bracket,{format_number(lo)},{format_number(hi)}")
        return 0
    est = spectrum.kh_dimension_interval(args.depth)
    print(f"{format_number(est.lower)},{format_number(est.upper)}")
    return 0


def cmd_spectrum(args) -> int:
    alpha = _require_alpha(args)
    eps = args.eps_start * 0.5 ** np.arange(args.rungs)
    if args.variant == "sg":
        lengths = spectrum.sg_length_spectrum()
        ds = lengths.abscissa
        rows = [(1.0 + e, spectrum.spectrum_trace(lengths, ds * (1.0 + e)), 0.0)
                for e in eps]
    elif args.variant == "stretched":
        lengths = spectrum.stretched_length_spectrum(alpha)
        ds = lengths.abscissa
        rows = [(1.0 + e, spectrum.spectrum_trace(lengths, ds * (1.0 + e)), 0.0)
                for e in eps]
    else:
        est = spectrum.kh_dimension_interval(args.depth)
        ds = 0.5 * (est.lower + est.upper)
        rows = []
        for e in eps:
            lo, hi = spectrum.kh_trace_interval(ds * (1.0 + e), args.depth)
            rows.append((1.0 + e, lo, (hi - lo) if np.isfinite(hi) else float("inf")))
    lines = ["s,trace,tail_bound,residue_running"]
    for s, trace, tail in rows:
        lines.append(",".join([
            format_number(s), format_number(trace), format_number(tail),
            format_number((s - 1.0) * trace),
        ]))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def cmd_distance(args) -> int:
    alpha = _require_alpha(args)
    if args.variant == "harmonic":
        raise UsageError("distance supports the sg and stretched variants")
    model = build_model(args.variant, args.level, alpha)
    result = metric.geodesic(model, _parse_point(args.src), _parse_point(args.dst))
    print(f"{format_number(result.distance)},{result.level},"
          f"{format_number(result.error_bar)}")
    if args.path_out:
        with open(args.path_out, "w", encoding="ascii") as fh:
            json.dump(list(result.path), fh)
            fh.write("\n")
    return 0


def cmd_measure(args) -> int:
    f = TestFunction.parse(args.f)
    if args.family == "stretched-joining":
        if args.alpha is None:
            raise UsageError("--alpha is required for stretched-joining")
        n_min = max(args.n_min, 1)
    else:
        if args.alpha is not None:
            raise UsageError(f"--alpha does not apply to {args.family}")
        n_min = args.n_min
    lines = ["n,functional,f_expr,value"]
    for n in range(n_min, args.n + 1):
        value = measure.functional_sample(args.family, n, args.alpha)(f)
        lines.append(f"{n},{args.family},{args.f},{format_number(value)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def cmd_compare(args) -> int:
    report = measure.selfaffine_mass_spread(args.d, args.length)
    doc = {"L": report.L, "d": report.d, "min": report.min,
           "max": report.max, "ratio": report.ratio}
    text = json.dumps(doc) + "\n"
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def cmd_report(args) -> int:
    alpha = _require_alpha(args)
    os.makedirs(args.out_dir, exist_ok=True)

    def path(name: str) -> str:
        return os.path.join(args.out_dir, name)

    model = build_model(args.variant, args.level, alpha,
                        harmonic_depth=args.depth)
    write_model(model, path("model.json"))
    svg.emit_svg(model, path("model.svg"))

    with open(path("dimension.csv"), "w", encoding="ascii") as fh:
        fh.write("variant,lower,upper\n")
        if args.variant == "sg":
            est = spectrum.spectral_dimension(spectrum.sg_length_spectrum())
        elif args.variant == "stretched":
            est = spectrum.spectral_dimension(
                spectrum.stretched_length_spectrum(alpha))
        else:
            est = spectrum.kh_dimension_interval(args.depth)
        fh.write(f"{args.variant},{format_number(est.lower)},"
                 f"{format_number(est.upper)}\n")

    scan_args = argparse.Namespace(
        variant=args.variant, alpha=alpha, depth=args.depth,
        eps_start=0.1, rungs=8, out=path("spectrum_scan.csv"),
    )
    cmd_spectrum(scan_args)

    if args.variant == "stretched":
        lines = ["n,functional,f_expr,value"]
        for text in ("1", "x", "y", "x^2", "x*y"):
            f = TestFunction.parse(text)
            for n in (2, 4, 6):
                value = measure.functional_sample("stretched-joining", n, alpha)(f)
                lines.append(f"{n},stretched-joining,{text},{format_number(value)}")
        with open(path("measures.csv"), "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    if args.variant == "harmonic":
        report = measure.selfaffine_mass_spread(1.5, min(args.level + 2, 6))
        with open(path("spread.json"), "w", encoding="ascii") as fh:
            json.dump({"L": report.L, "d": report.d, "min": report.min,
                       "max": report.max, "ratio": report.ratio}, fh)
            fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_variant(p, include_harmonic: bool = True) -> None:
    choices = ["sg", "stretched"] + (["harmonic"] if include_harmonic else [])
    p.add_argument("--variant", required=True, choices=choices)
    p.add_argument("--alpha", type=float, default=None,
                   help="stretching parameter, required for --variant stretched")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gasketlab",
        description="Sierpinski gasket variants: models, spectra, geodesics, measures",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("build", help="build a model and write its JSON")
    _add_variant(p)
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--depth", type=int, default=4,
                   help="harmonic edge-length subdivision depth")
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None, help="also render to this SVG file")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("dimension", help="spectral dimension (value or interval)")
    _add_variant(p)
    p.add_argument("--depth", type=int, default=3,
                   help="harmonic truncation depth")
    p.add_argument("--bracket", action="store_true",
                   help="also print the independent growth bracket")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="bracket bisection tolerance")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("spectrum", help="trace scan along the residue ladder")
    _add_variant(p)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--eps-start", type=float, default=0.1)
    p.add_argument("--rungs", type=int, default=8)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("distance", help="geodesic distance between two points")
    _add_variant(p, include_harmonic=False)
    p.add_argument("--from", dest="src", required=True, metavar="X,Y")
    p.add_argument("--to", dest="dst", required=True, metavar="X,Y")
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--path-out", default=None,
                   help="write the node-id path as JSON")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("measure", help="evaluate a discrete measure functional")
    p.add_argument("--family", required=True,
                   choices=["sg-midpoints", "harmonic-midpoints",
                            "stretched-joining"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--f", required=True, help="test function, e.g. 'x^2 + 3*y'")
    p.add_argument("--n", type=int, required=True, help="largest stage")
    p.add_argument("--n-min", type=int, default=0, help="smallest stage")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("compare",
                       help="norm-power vs self-affine cell-mass spread")
    p.add_argument("--d", type=float, required=True,
                   help="trial Hausdorff dimension")
    p.add_argument("--length", type=int, required=True, help="word length")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="write a bundle of artifacts")
    _add_variant(p)
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except GasketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
