"""Command-line interface for qvol."""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .cfrac import SurgeryPresentation
from .config import load_run_config, parse_theta, settings
from .exceptions import DomainError, HypothesisError, QvolError
from .fourier import QuadratureSpec, coefficient_set, poisson_check, verify_volume_conjecture
from .geom import cone_family
from .qinv import choose_color, rt_invariant
from .reports import GEOMETRY_HEADER, geometry_rows, render, rows_to_csv, write_report
from .specfun import PrecisionMode, bloch_wigner, dilog, lobachevsky, quantum_dilog, quantum_dilog_prime
from .utils.file_utils import write_text

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_DOMAIN = 2
EXIT_HYPOTHESIS = 3


def _add_slope(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--p", type=int, required=required, default=None, help="Numerator of the slope")
    parser.add_argument("--q", type=int, required=required, default=None, help="Denominator of the slope")
    parser.add_argument("--a0", type=int, default=None, help="Framing of the knot (default: 0)")


def parse_args(args: List[str]) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="qvol",
        description="Quantum invariants and cone-manifold volumes of fillings of the figure-eight knot.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Logging level (default: settings.LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    rt = sub.add_parser("rt", help="Evaluate RT_r(M, K, m0)")
    _add_slope(rt)
    rt.add_argument("--r", type=int, required=True, help="Odd level r >= 3")
    color = rt.add_mutually_exclusive_group(required=True)
    color.add_argument("--m0", type=int, help="Color of the knot")
    color.add_argument("--theta", help="Cone angle; the color is chosen to match it (e.g. pi, 3pi/4)")
    rt.add_argument("--branch", choices=["minus", "plus"], default="minus")
    rt.add_argument("--mode", choices=["raw", "symmetrized"], default="symmetrized")
    rt.add_argument("--precision-bits", type=int, default=53)
    rt.add_argument("--workers", type=int, default=None)

    geom = sub.add_parser("geom", help="Solve the cone geometry")
    _add_slope(geom)
    geom.add_argument("--theta", required=True, help="Cone angle, or the last angle of a grid")
    geom.add_argument("--grid", type=int, default=1, help="Number of equally spaced angles up to --theta")
    geom.add_argument("--format", choices=["csv", "json"], default="csv")
    geom.add_argument("--output", "-o", help="Output file (default: stdout)")

    verify = sub.add_parser("verify", help="Compare RT_r with the predicted leading term")
    verify.add_argument("--config", help="key=value or YAML run configuration")
    _add_slope(verify, required=False)
    verify.add_argument("--theta", default=None)
    verify.add_argument("--r-min", type=int, default=None)
    verify.add_argument("--r-max", type=int, default=None)
    verify.add_argument("--r-step", type=int, default=None)
    verify.add_argument("--branch", choices=["minus", "plus"], default=None)
    verify.add_argument("--mode", choices=["raw", "symmetrized"], default=None)
    verify.add_argument("--precision-bits", type=int, default=None)
    verify.add_argument("--normalization", choices=["effective", "literal"], default="effective")
    verify.add_argument("--delta", type=float, default=None, help="Collar of D_delta for the region check")
    verify.add_argument("--format", choices=["csv", "json"], default=None)
    verify.add_argument("--output", "-o", default=None)
    verify.add_argument("--workers", type=int, default=None)

    check = sub.add_parser("fourier-check", help="Poisson summation check for a k = 1 filling")
    _add_slope(check)
    check.add_argument("--theta", required=True)
    check.add_argument("--r", type=int, required=True)
    check.add_argument("--n", type=int, default=2, help="Coefficients with |k1|, |k2| <= n")
    check.add_argument("--bump", choices=["smooth", "indicator"], default="smooth")
    check.add_argument("--delta", type=float, default=None)
    check.add_argument("--workers", type=int, default=None)

    special = sub.add_parser("specfun", help="Evaluate a special function")
    special.add_argument(
        "function", choices=["dilog", "lobachevsky", "bloch-wigner", "qdilog", "qdilog-prime"]
    )
    special.add_argument("z", help="Argument, e.g. 0.5, 1+2j or pi/3 for lobachevsky")
    special.add_argument("--r", type=int, default=None, help="Level for the quantum dilogarithm")

    return parser.parse_args(args)


def _presentation(args: argparse.Namespace) -> SurgeryPresentation:
    return SurgeryPresentation.from_slope(args.p, args.q, args.a0 or 0)


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        write_text(output, text)
        print(f"Report saved to {output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _complex_json(value: complex) -> Dict[str, float]:
    return {"re": value.real, "im": value.imag}


def cmd_rt(args: argparse.Namespace) -> int:
    pres = _presentation(args)
    result: Dict[str, Any] = {"p": pres.p, "q": pres.q, "a0": pres.a0}
    if args.theta is not None:
        theta = parse_theta(args.theta)
        m0 = choose_color(args.r, theta, args.branch)
        result["theta"] = theta
    else:
        m0 = args.m0
    value = rt_invariant(args.r, pres, m0, mode=args.mode,
                         precision=PrecisionMode.from_bits(args.precision_bits), workers=args.workers)
    result.update(value.to_dict())
    _emit(json.dumps(result, indent=2) + "\n", None)
    return 0


def cmd_geom(args: argparse.Namespace) -> int:
    pres = _presentation(args)
    theta = parse_theta(args.theta)
    if args.grid < 1:
        raise DomainError("--grid must be at least 1")
    grid = np.linspace(theta / args.grid, theta, args.grid)
    family = cone_family(pres, grid)
    rows = geometry_rows(family)
    if args.format == "json":
        text = json.dumps({"rows": rows, "decreasing": family.decreasing, "concave": family.concave}, indent=2) + "\n"
    else:
        text = rows_to_csv(GEOMETRY_HEADER, rows)
    _emit(text, args.output)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    overrides = {
        "p": args.p,
        "q": args.q,
        "a0": args.a0,
        "theta": args.theta,
        "r_min": args.r_min,
        "r_max": args.r_max,
        "r_step": args.r_step,
        "branch": args.branch,
        "mode": args.mode,
        "precision_bits": args.precision_bits,
        "delta": args.delta,
        "format": args.format,
        "output_path": args.output,
    }
    config = load_run_config(args.config, overrides)
    pres = SurgeryPresentation.from_slope(config.p, config.q, config.a0)
    report = verify_volume_conjecture(
        pres,
        config.theta,
        config.r_list,
        branch=config.branch,
        mode=config.mode,
        precision=config.precision,
        normalization=args.normalization,
        workers=args.workers,
        delta=config.delta,
    )
    if config.output_path:
        write_report(report, config.output_path, config.format)
        print(f"Report saved to {config.output_path}", file=sys.stderr)
    else:
        sys.stdout.write(render(report, config.format))
    return 0


def cmd_fourier_check(args: argparse.Namespace) -> int:
    pres = _presentation(args)
    theta = parse_theta(args.theta)
    quad = QuadratureSpec(delta=args.delta or settings.DELTA, workers=args.workers)
    lhs, rhs, gap = poisson_check(pres, theta, args.r, coefficient_set(args.n), bump=args.bump, quad=quad)
    result = {"r": args.r, "n": args.n, "bump": args.bump,
              "lhs": _complex_json(lhs), "rhs": _complex_json(rhs), "gap": gap}
    _emit(json.dumps(result, indent=2) + "\n", None)
    return 0


def cmd_specfun(args: argparse.Namespace) -> int:
    if args.function == "lobachevsky":
        value: complex = complex(lobachevsky(parse_theta(args.z)))
    else:
        try:
            z = complex(args.z.replace(" ", ""))
        except ValueError:
            raise DomainError(f"Invalid complex argument '{args.z}'") from None
        if args.function == "dilog":
            value = complex(dilog(z))
        elif args.function == "bloch-wigner":
            value = complex(bloch_wigner(z))
        else:
            if args.r is None:
                raise DomainError("--r is required for the quantum dilogarithm")
            fn = quantum_dilog if args.function == "qdilog" else quantum_dilog_prime
            value = complex(fn(args.r, z))
    _emit(json.dumps({"function": args.function, "z": args.z, **_complex_json(value)}, indent=2) + "\n", None)
    return 0


COMMANDS = {
    "rt": cmd_rt,
    "geom": cmd_geom,
    "verify": cmd_verify,
    "fourier-check": cmd_fourier_check,
    "specfun": cmd_specfun,
}


def main(args: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    if args is None:
        args = sys.argv[1:]
    parsed = parse_args(args)
    logging.basicConfig(
        level=(parsed.log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[parsed.command](parsed)
    except DomainError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except HypothesisError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except QvolError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.exception("Unexpected failure")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
