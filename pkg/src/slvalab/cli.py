"""Command-line laboratory: simulation sweeps, spectra, CRC search, bounds,
capacity curves, complexity curves, and the design sweep.

Every subcommand accepts ``--config FILE`` holding flat ``key=value`` lines
that mirror the long flags; explicit flags override the file.  Outputs are
CSV files with a header row and ``#``-prefixed metadata lines.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Sequence


from .benchmarks import (
    ComplexityParams,
    chebyshev_list_bound,
    complexity_report,
    design_sweep,
    markov_list_bound,
)
from .capacity import (
    CodedChannelModel,
    capacity_llb,
    capacity_nnlb,
    capacity_nnub,
    capacity_true,
    estimate_true_row,
)
from .channel import db_to_linear
from .convcode import ConvCode, FrameLayout, build_trellis
from .crcsearch import search_crc
from .gf2 import CrcCode
from .harness import SimConfig, SimRunner, binomial_ci, write_sweep_csv
from .spectrum import enumerate_spectrum, low_snr_limits, nna_nack, nna_ue, union_bound_nack, union_bound_ue


def parse_snr_grid(text: str) -> list[float]:
    """Parse 'start:step:stop' (inclusive), a comma list, or one value."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("SNR range must be start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("SNR step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(max(count, 1))]
    return [float(p) for p in text.split(",") if p.strip()]


def _write_csv(path: str, meta: list[str], header: Sequence[str], rows: list[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        for line in meta:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _load_config_pairs(path: str) -> list[tuple[str, str]]:
    pairs = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line is not key=value: {line!r}")
            key, value = line.split("=", 1)
            pairs.append((key.strip(), value.strip()))
    return pairs


def _apply_config(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Inject config-file values as defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    sub = argv[0]
    idx = argv.index("--config")
    pairs = _load_config_pairs(argv[idx + 1])
    subparser = _find_subparser(parser, sub)
    known = set(subparser._option_string_actions) if subparser else set()
    injected: list[str] = []
    for key, value in pairs:
        flag = "--" + key
        if flag not in known or flag in argv:
            continue
        action = subparser._option_string_actions[flag]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes"):
                injected.append(flag)
        else:
            injected.extend([flag, value])
    return [sub] + injected + argv[1:]


def _find_subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(name)
    return None


def _add_common(p: argparse.ArgumentParser, crc_required: bool = False) -> None:
    p.add_argument("--cc", required=True, help="comma-separated octal generators, e.g. 13,17")
    p.add_argument("--crc", required=crc_required, default=None,
                   help="CRC generator as hex, e.g. 0x43 (omit for soft Viterbi only)")
    p.add_argument("--k", type=int, required=True, help="message bits per frame")
    p.add_argument("--config", default=None, help="key=value file mirroring the flags")
    p.add_argument("--out", required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slvalab",
        description="Convolutional code + CRC laboratory under serial list Viterbi decoding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo FER/UE/NACK sweep over SNR")
    _add_common(p)
    p.add_argument("--snr-db", required=True, help="start:step:stop or comma list (dB)")
    p.add_argument("--frames", type=int, default=100_000)
    p.add_argument("--list-size", default="max", help="integer or 'max'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zero-message", action="store_true",
                   help="transmit the all-zero message instead of random ones")
    p.add_argument("--target-rel-ci", type=float, default=None,
                   help="grow the run until the relative CI of P_Fail drops below this")
    p.add_argument("--max-frames", type=int, default=None)

    p = sub.add_parser("spectrum", help="distance spectrum B_d / A_d")
    _add_common(p)
    p.add_argument("--dmax", type=int, default=24)

    p = sub.add_parser("crc-search", help="rank all degree-m CRC candidates")
    p.add_argument("--cc", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--depth", type=int, default=24)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bounds", help="union bounds, NNA curves, low-SNR limits")
    _add_common(p, crc_required=True)
    p.add_argument("--snr-db", required=True)
    p.add_argument("--dmax", type=int, default=24)
    p.add_argument("--dtilde", type=int, default=24)
    p.add_argument("--l-grid", default=None, help="start:step:stop list sizes for tail bounds")
    p.add_argument("--var-nlva", type=float, default=None,
                   help="empirical var(N_LVA) for the Chebyshev curve")
    p.add_argument("--out-list", default=None, help="CSV path for the per-L tail bounds")

    p = sub.add_parser("capacity", help="coded channel capacity vs SNR")
    _add_common(p, crc_required=True)
    p.add_argument("--model", choices=["llb", "nnlb", "nnub", "true"], required=True)
    p.add_argument("--snr-db", required=True)
    p.add_argument("--frames", type=int, default=100_000)
    p.add_argument("--list-size", default="max")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-use", action="store_true",
                   help="report bits per channel bit instead of per codeword")

    p = sub.add_parser("complexity", help="E[N_LVA], E[I_LVA] and time ratios vs list size")
    _add_common(p, crc_required=True)
    p.add_argument("--snr-db", required=True, help="single SNR point (dB)")
    p.add_argument("--l-grid", default="1:1:32")
    p.add_argument("--c1", type=float, default=1.5)
    p.add_argument("--c2", type=float, default=2.2)
    p.add_argument("--frames", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("design-sweep", help="SNR gap vs complexity for CC-CRC pairs")
    p.add_argument("--pairs", required=True,
                   help="CSV with columns cc,crc ('13,17' quoted; empty crc = none)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--target-fer", type=float, default=1e-3)
    p.add_argument("--c1", type=float, default=1.5)
    p.add_argument("--c2", type=float, default=2.2)
    p.add_argument("--frames", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window-db", default="-2:10", help="lo:hi SNR search window")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    return parser


def _cmd_simulate(args) -> None:
    cc = ConvCode.from_octal(args.cc)
    crc = CrcCode.from_hex(args.crc) if args.crc else None
    list_size = args.list_size if args.list_size == "max" else int(args.list_size)
    cfg = SimConfig(
        cc=cc, crc=crc, k=args.k, snr_db=parse_snr_grid(args.snr_db),
        frames=args.frames, list_size=list_size, seed=args.seed,
        all_zero_message=args.zero_message, target_rel_ci=args.target_rel_ci,
        max_frames=args.max_frames,
    )
    points = SimRunner(cfg).run()
    write_sweep_csv(args.out, cfg, points)


def _cmd_spectrum(args) -> None:
    cc = ConvCode.from_octal(args.cc)
    crc = CrcCode.from_hex(args.crc) if args.crc else None
    m = crc.m if crc else 0
    layout = FrameLayout(args.k, m, cc.v, cc.rate_inverse)
    spec = enumerate_spectrum(build_trellis(cc), crc, layout, args.dmax)
    rows = [(d, spec.b(d), spec.a(d)) for d in range(1, args.dmax + 1)]
    meta = [
        f"cc={cc.octal_label()} crc={crc.hex_label if crc else 'none'} k={args.k}",
        f"d_free={spec.d_free} d_crc={spec.d_crc}",
    ]
    _write_csv(args.out, meta, ("d", "b_d", "a_d"), rows)


def _cmd_crc_search(args) -> None:
    cc = ConvCode.from_octal(args.cc)
    layout = FrameLayout(args.k, args.m, cc.v, cc.rate_inverse)
    report = search_crc(build_trellis(cc), layout, args.m, args.depth)
    rows = []
    for rank, prof in enumerate(report.ranked, start=1):
        rows.append(
            (
                rank,
                prof.crc.hex_label,
                prof.d_crc if prof.d_crc is not None else f">{args.depth}",
                prof.crc in report.tie_set,
                ";".join(str(a) for a in prof.a_profile),
            )
        )
    meta = [
        f"cc={cc.octal_label()} m={args.m} k={args.k} depth={args.depth}",
        f"winner={report.winner.hex_label} tie_set="
        + ",".join(c.hex_label for c in report.tie_set),
    ]
    _write_csv(args.out, meta, ("rank", "crc", "d_crc", "in_tie_set", "a_profile"), rows)


def _cmd_bounds(args) -> None:
    cc = ConvCode.from_octal(args.cc)
    crc = CrcCode.from_hex(args.crc)
    layout = FrameLayout(args.k, crc.m, cc.v, cc.rate_inverse)
    spec = enumerate_spectrum(build_trellis(cc), crc, layout, args.dmax)
    limits = low_snr_limits(crc.m, layout)
    rows = []
    for snr in parse_snr_grid(args.snr_db):
        g = db_to_linear(snr)
        rows.append(
            (
                snr,
                union_bound_ue(spec, g, args.dtilde),
                union_bound_nack(spec, g, args.dtilde),
                nna_ue(spec, g),
                nna_nack(spec, g),
                limits.ue_single_trial,
            )
        )
    meta = [
        f"cc={cc.octal_label()} crc={crc.hex_label} k={args.k} dtilde={args.dtilde}",
        f"d_free={spec.d_free} d_crc={spec.d_crc}",
    ]
    _write_csv(
        args.out, meta,
        ("snr_db", "union_ue", "union_nack", "nna_ue", "nna_nack", "ue1_low_snr_limit"),
        rows,
    )
    if args.out_list:
        grid = parse_snr_grid(args.l_grid or "1:1:32")
        lrows = []
        for L in grid:
            L = int(L)
            cheb = (
                chebyshev_list_bound(args.var_nlva, L)
                if (args.var_nlva is not None and L >= 2)
                else ""
            )
            lrows.append((L, markov_list_bound(L), cheb))
        _write_csv(args.out_list, meta, ("l", "markov", "chebyshev"), lrows)


def _capacity_ci(model_fn, model: CodedChannelModel, frames: int) -> float:
    """Delta-method CI: wiggle epsilon and alpha by their binomial CIs."""
    base = model_fn(model)
    d_eps = binomial_ci(model.epsilon, frames)
    d_alpha = binomial_ci(model.alpha, frames)
    total = 0.0
    for de, da in ((d_eps, 0.0), (0.0, d_alpha)):
        eps = min(max(model.epsilon + de, 0.0), 1.0 - model.alpha)
        alpha = min(max(model.alpha + da, 0.0), 1.0 - eps)
        try:
            shifted = CodedChannelModel(
                model.k, eps, alpha, model.nn_count, model.eps_star, None
            )
            total += (model_fn(shifted) - base) ** 2
        except ValueError:
            pass
    return math.sqrt(total)


def _cmd_capacity(args) -> None:
    cc = ConvCode.from_octal(args.cc)
    crc = CrcCode.from_hex(args.crc)
    layout = FrameLayout(args.k, crc.m, cc.v, cc.rate_inverse)
    trellis = build_trellis(cc)
    list_size = args.list_size if args.list_size == "max" else int(args.list_size)
    scale = 1.0 / layout.n_channel if args.per_use else 1.0
    rows = []
    for snr in parse_snr_grid(args.snr_db):
        if args.model == "llb":
            cfg = SimConfig(cc=cc, crc=crc, k=args.k, snr_db=[snr],
                            frames=args.frames, list_size=list_size, seed=args.seed)
            stats = SimRunner(cfg).run_point(snr)
            model = CodedChannelModel(args.k, stats.p_ue, stats.p_nack, nn_count=1)
            cap = capacity_llb(model)
            ci = _capacity_ci(capacity_llb, model, stats.frames)
        else:
            model = estimate_true_row(
                trellis, crc, layout, db_to_linear(snr), list_size, args.frames, args.seed
            )
            fn = {"true": capacity_true, "nnlb": capacity_nnlb, "nnub": capacity_nnub}[args.model]
            cap = fn(model)
            # the delta-method CI wiggles (epsilon, alpha) on a row-free model,
            # so the true model borrows the NNUB sensitivity (same leading term)
            ci_fn = capacity_nnub if args.model == "true" else fn
            ci = _capacity_ci(ci_fn, model, args.frames)
        rows.append((snr, cap * scale, ci * scale, model.epsilon, model.alpha))
    meta = [
        f"cc={cc.octal_label()} crc={crc.hex_label} k={args.k} model={args.model}",
        f"list_size={args.list_size} frames={args.frames} seed={args.seed} "
        f"units={'bits/channel-bit' if args.per_use else 'bits/codeword'}",
    ]
    _write_csv(args.out, meta, ("snr_db", "capacity", "ci95", "epsilon", "alpha"), rows)


def _cmd_complexity(args) -> None:
    cc = ConvCode.from_octal(args.cc)
    crc = CrcCode.from_hex(args.crc)
    layout = FrameLayout(args.k, crc.m, cc.v, cc.rate_inverse)
    snrs = parse_snr_grid(args.snr_db)
    if len(snrs) != 1:
        raise SystemExit("complexity expects a single --snr-db point")
    cfg = SimConfig(cc=cc, crc=crc, k=args.k, snr_db=snrs,
                    frames=args.frames, list_size="max", seed=args.seed)
    runner = SimRunner(cfg, record_insertion_curve=True)
    stats = runner.run_point(snrs[0])
    params = ComplexityParams(args.c1, args.c2)
    rows = []
    for L in (int(x) for x in parse_snr_grid(args.l_grid)):
        L = min(L, stats.l_run)
        rep = complexity_report(layout, params, stats.e_nlva_at(L), stats.e_ilva_at(L))
        rows.append((L, rep.e_nlva, rep.e_ilva, rep.r_trace, rep.r_ins,
                     rep.r_total, rep.scaled_ops))
    meta = [
        f"cc={cc.octal_label()} crc={crc.hex_label} k={args.k} snr_db={snrs[0]}",
        f"c1={args.c1} c2={args.c2} frames={stats.frames} l_cap={stats.l_cap} seed={args.seed}",
    ]
    _write_csv(
        args.out, meta,
        ("l", "e_nlva", "e_ilva", "r_trace", "r_ins", "r_total", "scaled_ops"),
        rows,
    )


def _cmd_design_sweep(args) -> None:
    pairs = []
    with open(args.pairs, newline="") as fh:
        for row in csv.DictReader(fh):
            cc = ConvCode.from_octal(row["cc"])
            crc_field = (row.get("crc") or "").strip()
            crc = CrcCode.from_hex(crc_field) if crc_field else None
            pairs.append((cc, crc))
    lo, hi = (float(x) for x in args.window_db.split(":"))
    points = design_sweep(
        pairs, args.k, args.target_fer, ComplexityParams(args.c1, args.c2),
        frames=args.frames, seed=args.seed, window_db=(lo, hi),
    )
    rows = [
        (
            p.cc.octal_label(), p.crc.hex_label if p.crc else "none",
            p.crc.m if p.crc else 0, p.cc.v,
            f"{p.snr_star_db:.4f}", f"{p.gap_db:.4f}", f"{p.scaled_ops:.1f}",
            f"{p.e_nlva:.6g}", f"{p.e_ilva:.6g}", f"{p.fer_at_star:.6g}",
            p.frames, p.status,
        )
        for p in points
    ]
    meta = [f"k={args.k} target_fer={args.target_fer} c1={args.c1} c2={args.c2} seed={args.seed}"]
    _write_csv(
        args.out, meta,
        ("cc", "crc", "m", "v", "snr_star_db", "gap_db", "scaled_ops",
         "e_nlva", "e_ilva", "fer_at_star", "frames", "status"),
        rows,
    )


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv and not argv[0].startswith("-"):
        argv = _apply_config(argv, parser)
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "spectrum": _cmd_spectrum,
        "crc-search": _cmd_crc_search,
        "bounds": _cmd_bounds,
        "capacity": _cmd_capacity,
        "complexity": _cmd_complexity,
        "design-sweep": _cmd_design_sweep,
    }
    handlers[args.command](args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
