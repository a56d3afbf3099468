"""Command line entry point.

Exit codes: 0 pass, 1 experiment failure, 2 configuration error or bad usage.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import experiments as ex
from .config import DEFAULT_OUTPUT_DIR, ENV_OUTPUT_DIR, load_config
from .errors import ConfigurationError, NS1DError
from .io import OutputError
from .model import FluidParams

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("ns1d")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ns1d", description="1D compressible Navier-Stokes experiments")
    parser.add_argument("--output-dir", help="output root (overrides output.dir and $NS1D_OUTPUT_DIR)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    for name, text in (("run", "integrate and record functionals"),
                       ("decay", "long-time decay to the far-field density"),
                       ("scan", "brute-force inequality constants"),
                       ("sweep", "decay + bound checks over an (alpha, gamma, rho_bar) grid")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config")
    sp = sub.add_parser("vacuum", help="time after which the vacuum has closed")
    sp.add_argument("config")
    sp.add_argument("--rho1", type=float, help="density threshold (default: vacuum.rho1)")
    sp = sub.add_parser("bounds", help="no-growth check of G, max rho and 1/min rho")
    sp.add_argument("config")
    sp = sub.add_parser("mms", help="manufactured-solution convergence study")
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--n0", type=int, default=128)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--gamma", type=float, default=2.0)
    for sp in sub.choices.values():
        sp.add_argument("--output-dir", dest="sub_output_dir", help=argparse.SUPPRESS)
    return parser


def _report(outcome):
    status = "PASS" if outcome.passed else "FAIL"
    print(f"{status} {outcome.name}")
    for key, value in outcome.measured.items():
        print(f"  {key} = {value:.10g}")
    if outcome.error:
        print(f"  error: {outcome.error}")
    return EXIT_PASS if outcome.passed else EXIT_FAIL


def _dispatch(args) -> int:
    out_arg = args.sub_output_dir or args.output_dir
    if args.command == "mms":
        p = FluidParams(alpha=args.alpha, gamma=args.gamma, rho_bar=2.0)
        out = ex.convergence_study(p, args.levels, args.n0,
                                   output_dir=out_arg or _default_root())
        return _report(out)

    sc = load_config(args.config, output_dir=out_arg)
    root = sc.output_dir
    cmd = args.command
    if cmd == "run":
        return _report(ex.run_experiment(sc, output_dir=root))
    if cmd == "decay":
        return _report(ex.decay_experiment(sc, output_dir=root))
    if cmd == "bounds":
        return _report(ex.uniform_bound_experiment(sc, output_dir=root))
    if cmd == "vacuum":
        rho1 = args.rho1 if args.rho1 is not None else sc.experiment.rho1
        return _report(ex.vacuum_vanish_experiment(sc, rho1, output_dir=root))
    if cmd == "scan":
        e = sc.experiment
        return _report(ex.inequality_scan(sc.params, e.scan_s_list, e.scan_range, e.scan_samples,
                                          e.delta_bar, output_dir=root))
    if cmd == "sweep":
        e, p = sc.experiment, sc.params
        results = ex.parameter_sweep(sc, e.sweep_alpha or (p.alpha,), e.sweep_gamma or (p.gamma,),
                                     e.sweep_rho_bar or (p.rho_bar,), e.workers, output_dir=root)
        code = EXIT_PASS
        for key in sorted(results):
            for outcome in results[key].values():
                code = max(code, _report(outcome))
        return code
    raise AssertionError(cmd)


def _default_root():
    return os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_PASS
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NS1DError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
