"""Command-line entry point.

Exit codes: 0 success, 1 output error, 2 configuration error,
3 numerical or physicality error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import PRESETS, ScenarioConfig, load_config, parse_overrides
from .errors import ConfigError, DomainError, OutputError, PhysicalityError, QilinkError
from .montecarlo import SimConfig, bitstream_roundtrip
from .scenarios import emit, preset_config, run_scenario, run_sweep, write_waveform

EXIT_OK = 0
EXIT_OUTPUT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="YAML or JSON configuration file")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--ideal-receiver", action="store_true",
                   help="lossless detection, unit APD noise figure, no technical noise")
    p.add_argument("--seed", type=int, help="Monte-Carlo seed")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration key (repeatable), e.g. --set link.kappa_2=0.1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qilink", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named scenario")
    run.add_argument("preset", choices=PRESETS)
    _common(run)

    sweep = sub.add_parser("sweep", help="sweep one variable as configured under 'sweep'")
    _common(sweep)

    mc = sub.add_parser("mc", help="Monte-Carlo check of the analytic BER")
    _common(mc)
    mc.add_argument("--waveform", metavar="PATH",
                    help="also write a per-bit record of one run at the configured n_s")

    thr = sub.add_parser("threshold", help="classicality threshold and margin")
    _common(thr)
    return parser


def _load(args) -> ScenarioConfig:
    overrides = parse_overrides(args.overrides)
    if args.ideal_receiver:
        overrides["ideal_receiver"] = True
    if args.seed is not None:
        overrides["montecarlo.seed"] = args.seed
    if args.out is not None:
        overrides["output.path"] = args.out
    if args.format is not None:
        overrides["output.format"] = args.format
    return load_config(args.config, overrides)


def _run(args) -> int:
    cfg = _load(args)
    if args.command == "run":
        table = run_scenario(cfg, args.preset)
    elif args.command == "sweep":
        table = run_sweep(cfg)
    elif args.command == "mc":
        table = run_scenario(cfg, "montecarlo-check")
        if args.waveform:
            mc_cfg = preset_config(cfg, "montecarlo-check")
            link, noise_a, _ = mc_cfg.receivers()
            mc = mc_cfg.montecarlo
            sim = SimConfig(m_modes=mc.m_modes, n_bits=max(mc.waveform_bits, 100), seed=mc.seed,
                            sampling_mode=mc.sampling_modes[0])
            rt = bitstream_roundtrip(link, noise_a, mc_cfg.n_s, sim)
            records = list(rt.waveform_records())[: mc.waveform_bits]
            write_waveform(records, args.waveform)
    else:
        table = run_scenario(cfg, "threshold-report")
    emit(table, cfg.output.path, cfg.output.format)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (PhysicalityError, DomainError, QilinkError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
