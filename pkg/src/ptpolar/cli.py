"""Command-line front end: construct, encode, decode, simulate, spectrum, bounds."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import analysis
from .codec import LLR_CLIP, Codec, adaptive_scl_decode, encode, scl_decode
from .construction import CodeSpec, Flavor, resolved_weight_threshold
from .gf2 import row_weights
from .simharness import CSV_COLUMNS, ConfigError, load_config, parse_grid, run_sweep


def bits_to_text(bits: np.ndarray, fmt: str) -> str:
    bits = np.asarray(bits, dtype=np.uint8)
    if fmt == "bin":
        return "".join(str(int(b)) for b in bits)
    # hex: MSB first, left-padded with zeros to a whole number of digits
    pad = (-bits.size) % 4
    padded = np.concatenate([np.zeros(pad, dtype=np.uint8), bits])
    digits = padded.reshape(-1, 4) @ np.array([8, 4, 2, 1])
    return "".join(f"{d:x}" for d in digits)


def text_to_bits(text: str, length: int, fmt: str) -> np.ndarray:
    text = text.strip().lower().removeprefix("0x").removeprefix("0b")
    if fmt == "bin":
        if len(text) != length or set(text) - {"0", "1"}:
            raise ValueError(f"expected {length} binary digits")
        return np.array([int(c) for c in text], dtype=np.uint8)
    ndig = -(-length // 4)
    if len(text) != ndig:
        raise ValueError(f"expected {ndig} hex digits for {length} bits")
    value = int(text, 16)
    if value >> length:
        raise ValueError(f"hex value does not fit in {length} bits")
    return np.array([(value >> (length - 1 - k)) & 1 for k in range(length)], dtype=np.uint8)


def _parse_pt(text: str | None):
    if not text:
        return None
    parts = text.split(",")
    seed = int(parts[0])
    density = float(parts[1]) if len(parts) > 1 else 0.5
    return {"kind": "random", "seed": seed, "density": density}


def _add_code_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_argument_group("code")
    g.add_argument("--n", type=int, required=required, help="log2 of the block length")
    g.add_argument("--k", type=int, required=required, help="payload bits")
    g.add_argument("--kcrc", type=int, default=0, help="CRC bits (0 = none)")
    g.add_argument("--flavor", choices=[f.value for f in Flavor], default="polar")
    g.add_argument("--design-snr", type=float, default=-1.45, help="construction Es/N0 in dB")
    g.add_argument("--weight-threshold", type=int, default=None)
    g.add_argument("--pretransform", metavar="SEED[,DENSITY]", default=None)
    g.add_argument("--crc-poly", type=lambda s: int(s, 0), default=None, help="generator, e.g. 0x313")
    g.add_argument("--crc-init", type=lambda s: int(s, 0), default=0)


def _spec_from_args(args) -> CodeSpec:
    return CodeSpec(
        n=args.n,
        K=args.k,
        K_crc=args.kcrc,
        flavor=args.flavor,
        design_snr_db=args.design_snr,
        weight_threshold=args.weight_threshold,
        pretransform=_parse_pt(args.pretransform),
        crc_poly=args.crc_poly,
        crc_init=args.crc_init,
    )


def _provenance(codec: Codec) -> dict:
    out = codec.spec.to_dict()
    out["crc"] = codec.poly.to_dict() if codec.poly else None
    return out


def cmd_construct(args) -> int:
    spec = _spec_from_args(args)
    codec = Codec.from_spec(spec)
    info = codec.info_set
    w = row_weights(spec.n)
    report = {
        "code": _provenance(codec),
        "N": spec.N,
        "weight_threshold": resolved_weight_threshold(spec) if spec.flavor is Flavor.RM_POLAR else None,
        "min_info_row_weight": int(w[list(info.info_positions)].min()),
        "info_positions": list(info.info_positions),
        "frozen_positions": list(info.frozen_positions),
        "reliability_order": list(info.reliability_rank),
    }
    print(json.dumps(report))
    return 0


def cmd_encode(args) -> int:
    codec = Codec.from_spec(_spec_from_args(args))
    payload = text_to_bits(args.payload, codec.K, args.format)
    print(bits_to_text(encode(codec, payload), args.format))
    return 0


def cmd_decode(args) -> int:
    codec = Codec.from_spec(_spec_from_args(args))
    if args.llrs is not None:
        llrs = np.array([float(v) for v in args.llrs.split(",")])
    elif args.word is not None:
        word = text_to_bits(args.word, codec.N, args.format)
        llrs = (1.0 - 2.0 * word) * LLR_CLIP
    else:
        raise SystemExit("decode needs --word or --llrs")
    if args.adaptive:
        out = adaptive_scl_decode(codec, llrs, args.list)
    else:
        out = scl_decode(codec, llrs, args.list)
    print(
        json.dumps(
            {
                "payload": bits_to_text(out.payload, args.format),
                "crc_pass": out.crc_pass,
                "metric": out.selected_metric,
                "list_size_used": out.list_size_used,
            }
        )
    )
    return 0


def cmd_simulate(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        overrides = {}
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.out is not None:
            overrides["out"] = args.out
        if overrides:
            cfg = cfg.model_copy(update=overrides)
    else:
        if args.n is None or args.k is None or args.ebno is None:
            raise SystemExit("simulate needs --config or at least --n, --k and --ebno")
        pt = _parse_pt(args.pretransform)
        data = {
            "code": {
                "n": args.n,
                "K": args.k,
                "K_crc": args.kcrc,
                "flavor": args.flavor,
                "design_snr_db": args.design_snr,
                "weight_threshold": args.weight_threshold,
                "pretransform": {"seed": pt["seed"], "density": pt["density"]} if pt else None,
                "crc_poly": args.crc_poly,
                "crc_init": args.crc_init,
            },
            "ebno_db": args.ebno,
            "list_sizes": args.list or [32],
            "adaptive": args.adaptive,
            "target_errors": args.target_errors,
            "max_frames": args.max_frames,
            "seed": args.seed,
            "rate_mode": "(K+K_crc)/N" if args.rate_with_crc else "K/N",
            "workers": args.workers or 1,
            "genie": not args.no_genie,
            "out": args.out,
        }
        cfg = load_config(data)
    records = run_sweep(cfg)
    if cfg.out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.csv_row())
    return 0


def cmd_spectrum(args) -> int:
    codec = Codec.from_spec(_spec_from_args(args))
    if args.method == "brute":
        est = analysis.brute_force_spectrum(codec)
    else:
        est = analysis.list_probe_spectrum(codec, args.list_size)
    out = {"code": _provenance(codec), **est.to_dict()}
    print(json.dumps(out))
    return 0


def cmd_bounds(args) -> int:
    grid = parse_grid(args.ebno)
    K_total = args.k + (args.kcrc if args.count_crc else 0)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["ebno_db", "N", "K", "normal_approx_fer"])
    for e in grid:
        w.writerow([repr(e), 1 << args.n, K_total, repr(analysis.normal_approx_fer(1 << args.n, K_total, e))])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptpolar", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("construct", help="print information/frozen sets and the weight threshold")
    _add_code_args(s)
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("encode", help="encode one payload")
    _add_code_args(s)
    s.add_argument("payload", help="K payload bits as hex (MSB first) or binary")
    s.add_argument("--format", choices=["hex", "bin"], default="hex")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", help="decode one received word or LLR vector")
    _add_code_args(s)
    s.add_argument("--word", help="N hard-decision bits (hex or binary)")
    s.add_argument("--llrs", help="comma-separated channel LLRs (positive favours 0)")
    s.add_argument("--format", choices=["hex", "bin"], default="hex")
    s.add_argument("--list", type=int, default=8)
    s.add_argument("--adaptive", action="store_true", help="--list is then the maximum list size")
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("simulate", help="Monte Carlo FER sweep to CSV")
    s.add_argument("--config", help="YAML or JSON sweep configuration")
    _add_code_args(s, required=False)
    s.add_argument("--list", type=int, action="append", help="list size (repeatable)")
    s.add_argument("--adaptive", action="store_true", help="treat --list as the maximum list size")
    s.add_argument("--ebno", help="grid a:b:step or comma list, in dB")
    s.add_argument("--target-errors", type=int, default=100)
    s.add_argument("--max-frames", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--rate-with-crc", action="store_true", help="Eb/N0 against (K+K_crc)/N instead of K/N")
    s.add_argument("--no-genie", action="store_true", help="skip ML lower-bound bookkeeping")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out", help="CSV file (appended; finished points are skipped)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("spectrum", help="minimum distance and its multiplicity")
    _add_code_args(s)
    s.add_argument("--method", choices=["brute", "probe"], default="probe")
    s.add_argument("--list-size", type=int, default=4096)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("bounds", help="normal-approximation FER (stand-in for the random-coding union bound) as CSV")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--kcrc", type=int, default=0)
    s.add_argument("--count-crc", action="store_true", help="use K + K_crc as the message size")
    s.add_argument("--ebno", required=True, help="grid a:b:step or comma list, in dB")
    s.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
