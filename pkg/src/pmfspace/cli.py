"""Command-line front end.

Exit codes: 0 ok, 2 usage or malformed input, 3 domain violation
(e.g. zero probability mass), 4 detection failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bridge import build_substitute, build_substitute_short, ml_codeword_decode, symbolwise_decode
from .errors import DetectionFailure, DimensionMismatch, NonPositiveMass, PmfSpaceError
from .joint import JointPmf, argmax_brute, canonical_factorization, marginals_brute
from .markov import mrf_graph
from .pmf import norm

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_DETECTION = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _read_joint(path: str, smooth: float | None) -> JointPmf:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        obj = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read pmf from {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise UsageError("pmf file must be a JSON object with q, n and probs (or table)")
    if "probs" not in obj and "table" in obj:
        table = np.asarray(obj["table"], dtype=float)
        obj = {"q": obj.get("q", table.shape[0]), "n": obj.get("n", table.ndim), "probs": table.ravel().tolist()}
    try:
        return JointPmf.from_json(obj, smooth=smooth)
    except (KeyError, TypeError, ValueError, DimensionMismatch) as exc:
        if isinstance(exc, NonPositiveMass):
            raise
        raise UsageError(f"malformed pmf: {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _fmt(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _smoothing_note(args) -> None:
    if args.smooth is not None:
        _warn(f"zero entries lifted to {args.smooth:g} before normalizing")


def cmd_factorize(args) -> int:
    p = _read_joint(args.input, args.smooth)
    _smoothing_note(args)
    f = canonical_factorization(p)
    rows = [f"{'direction':<16}{'component':<40}{'norm':>12}  theta"]
    for fac in f:
        rows.append(f"{_fmt(fac.direction):<16}{_fmt(fac.component.probs):<40}{norm(fac.component):>12.6g}  {fac.is_theta()}")
    print("\n".join(rows))
    if args.output:
        _write(args.output, json.dumps({"q": f.q, "n": f.n, "factors": f.to_json()}, indent=2) + "\n")
    return EXIT_OK


def cmd_mrf(args) -> int:
    p = _read_joint(args.input, args.smooth)
    _smoothing_note(args)
    g = mrf_graph(p)
    _write(args.output, g.to_dot())
    if args.json:
        Path(args.json).write_text(json.dumps(g.to_json()) + "\n")
    return EXIT_OK


def cmd_decode(args) -> int:
    p = _read_joint(args.input, args.smooth)
    _smoothing_note(args)
    if args.code == "full":
        _, code, inputs = build_substitute(p)
    else:
        code, inputs = build_substitute_short(p)
    print(f"code: q={code.q} n={code.n} checks={code.checks}")
    print("H =")
    for row in code.h.data:
        print("  " + " ".join(str(int(v)) for v in row))
    if args.mode == "max":
        word = ml_codeword_decode(code, inputs)
        x = word[: p.n]
        print("argmax:", " ".join(map(str, x)))
        if args.oracle:
            ref = argmax_brute(p)
            print(f"oracle argmax: {' '.join(map(str, ref))} match={tuple(x) == ref}")
    else:
        marg = symbolwise_decode(code, inputs)[: p.n]
        for i, m in enumerate(marg):
            print(f"x{i}: {_fmt(m.probs)}")
        if args.oracle:
            ref = marginals_brute(p)
            dev = max(float(np.max(np.abs(a.probs - b.probs))) for a, b in zip(marg, ref))
            print(f"oracle max deviation: {dev:.3e}")
    return EXIT_OK


def cmd_pam_demo(args) -> int:
    from .detection.pam import pam_app, pam_inputs_gray, pam_inputs_natural

    build = pam_inputs_gray if args.gray else pam_inputs_natural
    try:
        code, inputs = build(args.m, args.y, args.sigma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    n = code.n
    print(f"{'gray' if args.gray else 'natural'} {args.m}-PAM, y={args.y:g}, sigma={args.sigma:g}")
    print("decoder inputs (lambda):", _fmt(inputs[:, 0]))
    marg = symbolwise_decode(code, inputs)[:n]
    for i, m in enumerate(marg):
        print(f"bit {i}: P(0)={m.probs[0]:.6g}")
    if args.oracle:
        ref = marginals_brute(pam_app(n, args.y, args.sigma, gray=args.gray))
        dev = max(float(np.max(np.abs(a.probs - b.probs))) for a, b in zip(marg, ref))
        print(f"oracle max deviation: {dev:.3e}")
    return EXIT_OK


def cmd_mimo_demo(args) -> int:
    from .detection.detectors import DetectorConfig, detect_mimo
    from .detection.mimo import MimoProblem
    from .detection.sim import draw_trials

    hc, bits, y, s2 = draw_trials(args.seed, args.snr, 0, 1, args.nt, args.nr)
    p = MimoProblem(hc[0], y[0], s2)
    cfg = DetectorConfig(max_iter=args.max_iter, tol=args.tol, max_log=args.max_log)
    print(f"{args.nr}x{args.nt} MIMO, snr={args.snr:g} dB, sigma2={s2:.6g}, detector={args.detector}")
    print("sent    :", " ".join(map(str, bits[0])))
    try:
        got, llr = detect_mimo(p, args.detector, cfg)
    except DetectionFailure as exc:
        got, llr = exc.partial
        print("detected:", " ".join(map(str, got)), "(no permutation converged)")
        print("llr     :", _fmt(llr))
        return EXIT_DETECTION
    print("detected:", " ".join(map(str, got)))
    print("llr     :", _fmt(llr))
    print(f"bit errors: {int(np.sum(got != bits[0]))}")
    return EXIT_OK


def _parse_snr(text: str) -> list[float]:
    parts = [s for s in text.replace(",", " ").split() if s]
    if not parts:
        raise UsageError("--snr needs at least one value")
    try:
        return [float(s) for s in parts]
    except ValueError as exc:
        raise UsageError(f"bad --snr list {text!r}") from exc


def cmd_sim(args) -> int:
    from .detection.sim import SimConfig, ber_csv, simulate_ber

    try:
        cfg = SimConfig(
            nt=args.nt,
            nr=args.nr,
            snr_db=tuple(_parse_snr(args.snr)),
            bits=args.bits,
            max_iter=args.max_iter,
            tol=args.tol,
            seed=args.seed,
            detector=args.detector,
            max_log=args.max_log,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    def progress(pt):
        print(f"{pt.detector} {pt.snr_db:g} dB: {pt.errors}/{pt.bits} errors", file=sys.stderr)

    points = simulate_ber(cfg, progress=progress)
    _write(args.output, ber_csv(points))
    return EXIT_DETECTION if args.strict and any(p.failures for p in points) else EXIT_OK


def _add_pmf_input(sp) -> None:
    sp.add_argument("input", help="JSON file with q, n and probs (x_0 slowest), or '-' for stdin")
    sp.add_argument("--smooth", type=float, default=None, metavar="EPS", help="lift zero entries to EPS first")


def _detector_flags(sp) -> None:
    sp.add_argument("--nt", type=int, default=2)
    sp.add_argument("--nr", type=int, default=2)
    sp.add_argument("--detector", choices=("tb", "etb", "map", "mmse"), default="tb")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-iter", type=int, default=30)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--max-log", action="store_true", help="max-log BCJR recursions")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pmfspace", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("factorize", help="canonical factorization of a joint pmf")
    _add_pmf_input(sp)
    sp.add_argument("-o", "--output", help="write the factorization as JSON")
    sp.set_defaults(func=cmd_factorize)

    sp = sub.add_parser("mrf", help="Markov random field graph as DOT")
    _add_pmf_input(sp)
    sp.add_argument("-o", "--output", help="DOT output (default stdout)")
    sp.add_argument("--json", help="also write the adjacency as JSON")
    sp.set_defaults(func=cmd_mrf)

    sp = sub.add_parser("decode", help="argmax or marginals through a channel decoder")
    _add_pmf_input(sp)
    sp.add_argument("--mode", choices=("max", "marginal"), default="marginal")
    sp.add_argument("--code", choices=("full", "short"), default="full")
    sp.add_argument("--oracle", action="store_true", help="compare with brute force")
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("pam-demo", help="M-PAM bit marginals through H_2PSK / H_GRAY")
    sp.add_argument("--m", type=int, default=16)
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--gray", action="store_true")
    sp.add_argument("--oracle", action="store_true")
    sp.set_defaults(func=cmd_pam_demo)

    sp = sub.add_parser("mimo-demo", help="detect one random MIMO QPSK symbol")
    _detector_flags(sp)
    sp.add_argument("--snr", type=float, default=10.0, help="Nr*Eb/N0 in dB")
    sp.set_defaults(func=cmd_mimo_demo)

    sp = sub.add_parser("sim", help="BER simulation, CSV output")
    _detector_flags(sp)
    sp.add_argument("--snr", required=True, help="comma separated Nr*Eb/N0 values in dB")
    sp.add_argument("--bits", type=int, default=20_000, help="information bits per SNR point")
    sp.add_argument("--workers", type=int, default=None, help="thread count (default PMF_HILBERT_THREADS or cpu count)")
    sp.add_argument("--strict", action="store_true", help="exit 4 if any etb trial failed to converge")
    sp.add_argument("-o", "--output", help="CSV output (default stdout)")
    sp.set_defaults(func=cmd_sim)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DetectionFailure as exc:
        print(f"detection failure: {exc}", file=sys.stderr)
        return EXIT_DETECTION
    except (PmfSpaceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
