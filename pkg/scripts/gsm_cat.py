"""
Command-line interface: scans, profiles, mixtures, cat search, purity curves.

    python scripts/gsm_cat.py scan --config config/presets/fig3.cfg
    python scripts/gsm_cat.py find-cat --config config/presets/fig5.cfg --set find_cat.blocks=200
    python scripts/gsm_cat.py info --config config/presets/fig5.cfg

Exit codes: 0 success, 1 configuration error, 2 numerical-guard failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import settings
from config.run_config import load_run_config
from services import scenario_service
from services.engine import Engine
from utils.errors import ConfigError, NumericalGuardError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsm-cat",
        description="Mixed cat states of Gaussian-Schell-model light in a parabolic graded-index waveguide",
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="Run configuration (INI)")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override a configuration value (repeatable)",
    )
    common.add_argument("--output-dir", help="Output directory (overrides [outputs] directory)")
    common.add_argument("--dump-coupling", action="store_true", help="Also write the coupling matrix T as CSV")

    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", parents=[common], help="Observables along z")
    scan.add_argument("--backend", choices=["local", "celery"], help="Scan backend (default: SCAN_BACKEND)")
    scan.add_argument("--workers", type=int, help="Number of z-chunks (default: SCAN_WORKERS)")

    profile = sub.add_parser("profile", parents=[common], help="Intensity profile at one distance")
    profile.add_argument("--z", type=float, help="Distance in um (default: [profile] z)")
    profile.add_argument("--no-split", action="store_true", help="Write only the total intensity")

    mixture = sub.add_parser("mixture", parents=[common], help="+x0/-x0 profiles and their incoherent sum")
    mixture.add_argument("--z", type=float, help="Distance in um (default: [mixture] z)")

    sub.add_parser("find-cat", parents=[common], help="Locate the cat distance numerically")
    sub.add_parser("purity-curve", parents=[common], help="Purity and entropy against r0/a0")
    sub.add_parser("info", parents=[common], help="Characteristic lengths and mode counts")

    return parser


def _print_info(summary: dict) -> None:
    print("=" * 60)
    print("Run summary")
    print("=" * 60)
    print(f"L_osc (ray half-period):      {summary['L_osc']:.6g} um")
    print(f"z_rev estimate:               {summary['z_rev_estimate']:.6g} um")
    print(f"z_cat estimate:               {summary['z_cat_estimate']:.6g} um")
    print(f"z_rev (quadratic beta):       {summary['z_rev_quadratic']:.6g} um")
    print(f"Fundamental waist w0:         {summary['w0']:.6g} um (a0/w0 = {summary['a0_over_w0']:.4g})")
    print(f"Source: c={summary['c']:.6g} 1/um^2, xi={summary['xi']:.6g}, P={summary['P']}")
    print(f"Purity:                       {summary['purity']:.10g} (numeric {summary['purity_numeric']:.10g})")
    print(f"Entropy:                      {summary['entropy']:.10g} (spectrum {summary['entropy_spectrum']:.10g})")
    print(f"Kernel residual of mode sum:  {summary['kernel_residual']:.3e} I0")
    print(f"Guided modes: M={summary['M']} retained of {summary['M_guided'] + 1}")
    print(
        f"Mean excited mode number:     {summary['mean_mode_number']:.6g} "
        f"(displacement estimate {summary['displacement_mode_number']:.6g})"
    )
    print(f"Worst completeness:           {summary['min_completeness']:.15f}")
    print("=" * 60)


def run(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, args.overrides)
    out = args.output_dir

    engine: Optional[Engine] = None
    needs_engine = args.command in {"profile", "mixture", "find-cat", "info"} or args.dump_coupling
    if args.command == "scan" and (args.backend or settings.SCAN_BACKEND) == "celery" and not args.dump_coupling:
        needs_engine = False
    elif args.command == "scan":
        needs_engine = True
    if needs_engine:
        engine = Engine.from_config(config)

    if args.dump_coupling:
        path = scenario_service.output_dir(config, out) / f"{config.outputs.prefix}_coupling.csv"
        scenario_service.write_coupling_csv(path, engine, config)

    if args.command == "scan":
        for path in scenario_service.cmd_scan(config, out, engine=engine, backend=args.backend, workers=args.workers):
            print(f"✓ {path}")

    elif args.command == "profile":
        split = False if args.no_split else None
        print(f"✓ {scenario_service.cmd_profile(config, z=args.z, split=split, out=out, engine=engine)}")

    elif args.command == "mixture":
        outcome = scenario_service.cmd_mixture(config, z=args.z, out=out, engine=engine)
        print(f"Mixture at z = {outcome['z']:.10g} um")
        for name, result in outcome["visibility"].items():
            flag = "" if result.has_fringes else " (no fringes)"
            print(f"  visibility {name:<5}: {result.visibility:.6f}{flag}")
        for path in outcome["paths"].values():
            print(f"✓ {path}")

    elif args.command == "find-cat":
        result, path = scenario_service.cmd_find_cat(config, out, engine=engine)
        if result.found:
            print(f"✓ z_cat = {result.z_cat:.10g} um ({result.ratio_to_estimate:.4f} x z_rev estimate {result.z_rev_estimate:.6g})")
            print(f"  r_c(z_cat) = {result.r_c_at_cat:.6g} um, nu envelope = {result.nu_envelope_at_cat:.6g}")
            print(f"  envelope contrast = {result.envelope_contrast:.4g}")
            print(f"  fringe distance = {result.z_fringe:.10g} um, lobe separation = {result.lobe_separation:.4g} um")
        else:
            print(f"✗ {result.message}")
        print(f"✓ {path}")

    elif args.command == "purity-curve":
        print(f"✓ {scenario_service.cmd_purity_curve(config, out)}")

    elif args.command == "info":
        settings.print_config()
        _print_info(scenario_service.info(config, engine=engine))

    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )
    args = build_parser().parse_args(argv)

    try:
        return run(args)
    except ConfigError as e:
        print(f"✗ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as e:
        print(f"✗ Numerical guard failed: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
