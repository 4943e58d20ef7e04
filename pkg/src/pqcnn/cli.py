"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
All randomness derives from ``--seed`` (default: ``$PQCNN_SEED`` or 0).
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import hamming, keyfile, mceliece, unistat
from .dataio import Dataset, load_csv, read_table, synthetic_cellular
from .gf2matrix import format_bits
from .model import (
    DEFAULT_ACTIVATIONS,
    PqcnnConfig,
    PqcnnModel,
    alpha_sweep,
    decrypt,
    derive_rng,
    encrypt,
    evaluate,
    parse_alpha_range,
    train,
)
from .neuralnet import Network

SWEEP_HEADER = ("alpha", "mse", "theta_noise", "theta_ciphertext")


class CommandError(Exception):
    """Runtime failure reported as a one-line message with exit code 1."""


def default_seed() -> int:
    raw = os.environ.get("PQCNN_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CommandError(f"PQCNN_SEED must be an integer, got {raw!r}") from None


def _bits(text: str) -> list[int]:
    text = text.strip().strip("[]").replace(" ", "").replace(",", "")
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected a bit string such as 1000, got {text!r}")
    return [int(ch) for ch in text]


def _alphas(text: str) -> list[float]:
    try:
        values = parse_alpha_range(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty alpha range {text!r}")
    return values


def _check_outputs(args, *names: str) -> None:
    for name in names:
        path = getattr(args, name, None)
        if path is not None and Path(path).exists() and not args.force:
            raise CommandError(f"{path} exists; pass --force to overwrite")


def _write_text(path, text: str, force: bool) -> None:
    p = Path(path)
    if p.exists() and not force:
        raise CommandError(f"{p} exists; pass --force to overwrite")
    p.write_text(text, encoding="utf-8")


def _toy_warning() -> None:
    print(f"warning: {mceliece.TOY_WARNING}", file=sys.stderr)


def _fmt(v: float) -> str:
    return repr(float(v))


# demo ---------------------------------------------------------------------

GOLDEN = {
    "encode": [1, 1, 1, 0, 0, 0, 0],
    "decode": [1, 0, 0, 0],
    "noisy": [1, 1, 1, 0, 0, 0, 1],
    "syndrome": [1, 1, 1],
    "position": 7,
    "public_key": [
        [0, 1, 1, 0, 1, 0, 1],
        [1, 0, 0, 0, 1, 0, 1],
        [1, 0, 1, 0, 1, 1, 0],
        [1, 0, 1, 1, 0, 0, 1],
    ],
    "ciphertext": [0, 1, 1, 0, 1, 0, 1],
    "unpermuted": [1, 0, 1, 0, 1, 0, 1],
    "scrambled": [1, 1, 0, 1],
    "plaintext": [1, 0, 0, 0],
}


def run_demo(out=None) -> int:
    """Print the worked example and compare every value with the golden copy."""
    out = out or sys.stdout
    code = hamming.standard_7_4()
    x = [1, 0, 0, 0]
    got: dict = {}
    lines = []

    got["encode"] = hamming.encode(code, x)
    lines.append(f"Hamming(7,4) encode  y = xG   : {format_bits(x)} -> {format_bits(got['encode'])}")
    got["decode"] = hamming.decode(code, got["encode"])
    lines.append(f"Hamming(7,4) decode  x = yR   : {format_bits(got['decode'])}")
    r = [0, 0, 0, 0, 0, 0, 1]
    got["noisy"] = [a ^ b for a, b in zip(got["encode"], r)]
    lines.append(f"noisy codeword       y' = y+r : {format_bits(got['noisy'])}")
    got["syndrome"] = hamming.syndrome(code, got["noisy"])
    fixed, got["position"] = hamming.correct(code, got["noisy"])
    lines.append(
        f"syndrome             z = y'H  : {format_bits(got['syndrome'])}"
        f" -> error at position {got['position']}, corrected {format_bits(fixed)}"
    )

    pk, sk = mceliece.keypair_from_factors(mceliece.EXAMPLE_S, code, mceliece.EXAMPLE_P)
    got["public_key"] = pk.g_prime.tolist()
    lines.append("McEliece public key  G' = SGP :")
    lines += ["    " + format_bits(row) for row in got["public_key"]]
    ct = mceliece.encrypt(pk, x, error=[0] * 7)
    got["ciphertext"] = list(ct.y)
    lines.append(f"encrypt              y = xG'+r: {format_bits(got['ciphertext'])}")
    trace = mceliece.decrypt_trace(sk, ct)
    got["unpermuted"] = trace.unpermuted
    got["scrambled"] = trace.scrambled_message
    got["plaintext"] = trace.message
    lines.append(f"decrypt  y P^-1                : {format_bits(trace.unpermuted)}")
    lines.append(f"         (xSG) R               : {format_bits(trace.scrambled_message)}")
    lines.append(f"         (xS) S^-1             : {format_bits(trace.message)}")

    bad = [k for k, v in GOLDEN.items() if got[k] != v]
    for line in lines:
        print(line, file=out)
    if bad:
        print(f"MISMATCH against golden values: {', '.join(bad)}", file=out)
        return 1
    print("all values match the worked example", file=out)
    return 0


# hamming / mceliece ----------------------------------------------------------

def cmd_demo(args) -> int:
    return run_demo()


def cmd_hamming_roundtrip(args) -> int:
    code = hamming.standard_7_4() if args.parity_bits == 3 else hamming.construct(args.parity_bits)
    if args.message is not None:
        if len(args.message) != code.k:
            raise CommandError(f"message must have {code.k} bits")
        y = hamming.encode(code, args.message)
        noisy = list(y)
        if args.flip is not None:
            if not 1 <= args.flip <= code.n:
                raise CommandError(f"--flip must be in 1..{code.n}")
            noisy[args.flip - 1] ^= 1
        z = hamming.syndrome(code, noisy)
        fixed, pos = hamming.correct(code, noisy)
        x = hamming.decode(code, fixed)
        print(f"codeword  {format_bits(y)}")
        print(f"received  {format_bits(noisy)}")
        print(f"syndrome  {format_bits(z)} -> " + (f"position {pos}" if pos else "no error"))
        print(f"decoded   {format_bits(x)}")
        return 0 if x == list(args.message) else 1

    failures = 0
    total = 0
    for value in range(1 << code.k):
        msg = [(value >> i) & 1 for i in range(code.k)]
        y = hamming.encode(code, msg)
        for flip in range(code.n + 1):
            noisy = list(y)
            if flip:
                noisy[flip - 1] ^= 1
            fixed, _ = hamming.correct(code, noisy)
            total += 1
            failures += hamming.decode(code, fixed) != msg
    print(
        f"Hamming({code.n},{code.k}): {total - failures}/{total} "
        f"message x error-pattern cases decoded correctly"
    )
    return 0 if failures == 0 else 1


def cmd_mceliece_keygen(args) -> int:
    _toy_warning()
    _check_outputs(args, "public", "private")
    code = hamming.standard_7_4() if args.parity_bits == 3 else hamming.construct(args.parity_bits)
    pk, sk = mceliece.keygen(code, np.random.default_rng(args.seed))
    keyfile.save_key(pk, args.public, force=args.force)
    keyfile.save_key(sk, args.private, force=args.force)
    print(f"wrote {args.public} and {args.private} (k={code.k}, n={code.n})")
    return 0


def cmd_mceliece_encrypt(args) -> int:
    _toy_warning()
    _check_outputs(args, "out")
    pk = keyfile.load_key(args.key, expect=keyfile.KIND_MCELIECE_PUBLIC)
    if len(args.message) != pk.k:
        raise CommandError(f"message must have {pk.k} bits, got {len(args.message)}")
    ct = mceliece.encrypt(
        pk, args.message, np.random.default_rng(args.seed), error_weight=args.error_weight
    )
    text = "".join(map(str, ct.y))
    if args.out:
        _write_text(args.out, text + "\n", args.force)
    print(text)
    return 0


def cmd_mceliece_decrypt(args) -> int:
    _toy_warning()
    sk = keyfile.load_key(args.key, expect=keyfile.KIND_MCELIECE_PRIVATE)
    if args.ciphertext is not None:
        bits = args.ciphertext
    elif args.input is not None:
        bits = _bits(Path(args.input).read_text(encoding="utf-8"))
    else:
        raise CommandError("give --ciphertext or --in")
    trace = mceliece.decrypt_trace(sk, bits)
    if args.verbose:
        print(f"y P^-1     {format_bits(trace.unpermuted)}")
        pos = trace.error_position
        print(f"corrected  {format_bits(trace.corrected)}" + (f" (bit {pos})" if pos else ""))
        print(f"(xS)       {format_bits(trace.scrambled_message)}")
    print("".join(map(str, trace.message)))
    return 0


# network cipher ------------------------------------------------------------------

def _load_dataset(args, c: Optional[int] = None) -> Dataset:
    if args.data == "synthetic":
        width = c if c is not None else args.c
        return synthetic_cellular(args.samples, width, derive_rng(args.seed, 100))
    ds = load_csv(args.data, has_header=args.has_header)
    if c is not None and ds.c != c:
        raise CommandError(f"{args.data} has {ds.c} columns, model expects {c}")
    return ds


def _config_from_args(args, alpha: Optional[float] = None) -> PqcnnConfig:
    acts = tuple(args.activations.split(",")) if args.activations else DEFAULT_ACTIVATIONS
    try:
        return PqcnnConfig(
            c=args.c,
            n=args.n,
            m=args.m,
            alpha=args.alpha if alpha is None else alpha,
            activations=acts,
            epochs=args.epochs,
            batch_size=args.batch_size,
            lr=args.lr,
            optimizer=args.optimizer,
            bandwidth=args.bandwidth,
            val_fraction=args.val_fraction,
            patience=args.patience,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CommandError(f"invalid configuration: {exc}") from None


def cmd_pqcnn_train(args) -> int:
    cfg = _config_from_args(args)
    _check_outputs(args, "enc_key", "dec_key", "history")
    data = _load_dataset(args)
    if data.c != cfg.c:
        cfg = cfg.with_(c=data.c)
    model, history = train(cfg, data)
    keyfile.save_key(model.encrypt_key(), args.enc_key, force=args.force)
    keyfile.save_key(model.decrypt_key(), args.dec_key, force=args.force)
    if args.history:
        rows = history.as_dicts()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["epoch"])
        writer.writeheader()
        writer.writerows(rows)
        _write_text(args.history, buf.getvalue(), args.force)
    print(
        f"trained c={cfg.c} n={cfg.n} m={cfg.m} alpha={cfg.alpha}: "
        f"best epoch {history.best_epoch}, validation MSE {model.validation_mse:.6g}"
    )
    return 0


def cmd_pqcnn_encrypt(args) -> int:
    _check_outputs(args, "out")
    key = keyfile.load_key(args.key, expect=keyfile.KIND_PQCNN_ENCRYPT)
    table = load_csv(args.input, has_header=args.has_header, scale=not args.no_scale).rows
    if table.shape[1] != key.c:
        raise CommandError(f"{args.input} has {table.shape[1]} columns, key expects {key.c}")
    y_prime, _ = encrypt(key, table, np.random.default_rng(args.seed))
    keyfile.save_ciphertext(y_prime, key.alpha, args.out, force=args.force)
    print(f"wrote {len(table)} ciphertext(s) of {key.n} values to {args.out}")
    return 0


def cmd_pqcnn_decrypt(args) -> int:
    _check_outputs(args, "out")
    key = keyfile.load_key(args.key, expect=keyfile.KIND_PQCNN_DECRYPT)
    ct = keyfile.load_ciphertext(args.input)
    if ct.n != key.n:
        raise CommandError(f"ciphertext has {ct.n} values, key expects {key.n}")
    out = decrypt(key, ct.values)
    text = "\n".join(",".join(_fmt(v) for v in row) for row in out) + "\n"
    if args.out:
        _write_text(args.out, text, args.force)
    else:
        sys.stdout.write(text)
    return 0


def cmd_pqcnn_eval(args) -> int:
    enc = keyfile.load_key(args.enc_key, expect=keyfile.KIND_PQCNN_ENCRYPT)
    dec = keyfile.load_key(args.dec_key, expect=keyfile.KIND_PQCNN_DECRYPT)
    m = args.m if args.m is not None else enc.m
    cfg = PqcnnConfig(
        c=enc.c, n=enc.n, m=m, alpha=enc.alpha,
        activations=tuple(l.activation for l in enc.layers + dec.layers),
    )
    model = PqcnnModel(cfg, Network(enc.layers + dec.layers))
    row = evaluate(model, _load_dataset(args, c=enc.c), derive_rng(args.seed, 11))
    _print_rows([row])
    return 0


def _print_rows(rows) -> None:
    print(f"{'alpha':>6}  {'mse':>12}  {'theta_noise':>12}  {'theta_ciphertext':>16}  uniform")
    for r in rows:
        verdict = "yes" if r.theta_ciphertext < unistat.UNIFORM_THRESHOLD else "no"
        print(
            f"{r.alpha:>6.3g}  {r.mse:>12.4e}  {r.theta_noise:>12.6g}  "
            f"{r.theta_ciphertext:>16.6g}  {verdict}"
        )


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow([_fmt(r.alpha), _fmt(r.mse), _fmt(r.theta_noise), _fmt(r.theta_ciphertext)])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args, alpha=args.alphas[0])
    _check_outputs(args, "out")
    data = _load_dataset(args)
    if data.c != cfg.c:
        cfg = cfg.with_(c=data.c)
    rows, _ = alpha_sweep(cfg, data, args.alphas, holdout_fraction=args.holdout)
    _print_rows(rows)
    if args.out:
        _write_text(args.out, sweep_csv(rows), args.force)
    return 0


def cmd_uniformity(args) -> int:
    if args.input == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.input).read_text(encoding="utf-8")
    try:
        values = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise CommandError(f"{args.input}: {exc}") from None
    if args.m >= len(values):
        print(
            f"warning: m={args.m} bins for {len(values)} values; bins should be fewer than values",
            file=sys.stderr,
        )
    rep = unistat.uniformity_report(values, args.m)
    print(f"values      {len(values)}")
    print(f"bins        {rep.bin_count}")
    print(f"chi_square  {rep.chi_square!r}")
    print(f"dof         {rep.dof}")
    print(f"theta       {rep.theta!r}")
    print(f"verdict     {rep.verdict()} (theta {'<' if rep.uniform else '>='} {unistat.UNIFORM_THRESHOLD})")
    return 0


# parser -------------------------------------------------------------------------

def _add_model_flags(p: argparse.ArgumentParser, alpha: bool = True) -> None:
    p.add_argument("--c", type=int, default=361, help="plaintext width (default 361)")
    p.add_argument("--n", type=int, default=64, help="ciphertext width (default 64)")
    p.add_argument("--m", type=int, default=16, help="histogram bins, must be < n (default 16)")
    if alpha:
        p.add_argument("--alpha", type=float, default=0.4, help="noise weight (default 0.4)")
    p.add_argument(
        "--activations",
        default=None,
        help="six comma-separated activations for S,G,P,L,M,N "
        f"(default {','.join(DEFAULT_ACTIVATIONS)})",
    )
    p.add_argument("--epochs", type=int, default=500, help="training epochs (default 500)")
    p.add_argument("--batch-size", type=int, default=32, help="mini-batch size (default 32)")
    p.add_argument("--lr", type=float, default=1e-3, help="learning rate (default 1e-3)")
    p.add_argument("--optimizer", choices=("adam", "gd"), default="adam")
    p.add_argument("--bandwidth", type=float, default=0.01, help="soft-histogram bandwidth (default 0.01)")
    p.add_argument("--val-fraction", type=float, default=0.1, help="validation share (default 0.1)")
    p.add_argument("--patience", type=int, default=None, help="early-stop after this many stale epochs")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", default="synthetic", help="CSV path or 'synthetic' (default)")
    p.add_argument("--samples", type=int, default=1000, help="rows for synthetic data (default 1000)")
    p.add_argument("--has-header", action="store_true", help="CSV has a header row")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqcnn",
        description="Toy Hamming/McEliece cipher and a noise-perturbed autoencoder cipher.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name: str, func, help_text: str, seed: bool = True, force: bool = False):
        p = sub.add_parser(name, help=help_text, description=help_text)
        if seed:
            p.add_argument("--seed", type=int, default=None, help="random seed (default $PQCNN_SEED or 0)")
        if force:
            p.add_argument("--force", action="store_true", help="overwrite existing output files")
        p.set_defaults(func=func)
        return p

    add("demo", cmd_demo, "print the (7,4) Hamming and McEliece worked example and self-check it", seed=False)

    p = add("hamming-roundtrip", cmd_hamming_roundtrip, "encode, corrupt, correct and decode", seed=False)
    p.add_argument("--parity-bits", type=int, default=3, help="r >= 3; code is (2^r-1, 2^r-1-r)")
    p.add_argument("--message", type=_bits, default=None, help="message bits; omit for an exhaustive check")
    p.add_argument("--flip", type=int, default=None, help="1-based bit position to flip")

    p = add("mceliece-keygen", cmd_mceliece_keygen, "generate a toy McEliece key pair", force=True)
    p.add_argument("--parity-bits", type=int, default=3)
    p.add_argument("--public", required=True, help="public key output path")
    p.add_argument("--private", required=True, help="private key output path")

    p = add("mceliece-encrypt", cmd_mceliece_encrypt, "encrypt a bit string with a public key", force=True)
    p.add_argument("--key", required=True)
    p.add_argument("--message", type=_bits, required=True)
    p.add_argument("--error-weight", type=int, choices=(0, 1), default=1)
    p.add_argument("--out", default=None, help="also write the ciphertext bits here")

    p = add("mceliece-decrypt", cmd_mceliece_decrypt, "decrypt with a private key", seed=False)
    p.add_argument("--key", required=True)
    p.add_argument("--ciphertext", type=_bits, default=None)
    p.add_argument("--in", dest="input", default=None, help="file holding the ciphertext bits")
    p.add_argument("--verbose", action="store_true", help="show the intermediate values")

    p = add("pqcnn-train", cmd_pqcnn_train, "train the network cipher and write its key pair", force=True)
    _add_model_flags(p)
    _add_data_flags(p)
    p.add_argument("--enc-key", required=True, help="encrypt (public) key output")
    p.add_argument("--dec-key", required=True, help="decrypt (private) key output")
    p.add_argument("--history", default=None, help="per-epoch CSV output")

    p = add("pqcnn-encrypt", cmd_pqcnn_encrypt, "encrypt CSV rows with an encrypt key", force=True)
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="input", required=True, help="CSV plaintext rows")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--no-scale", action="store_true", help="rows are already in [0,1]; skip min-max scaling")
    p.add_argument("--out", required=True, help="ciphertext file")

    p = add("pqcnn-decrypt", cmd_pqcnn_decrypt, "decrypt a ciphertext file with a decrypt key", seed=False, force=True)
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None, help="CSV output (default stdout)")

    p = add("pqcnn-eval", cmd_pqcnn_eval, "report MSE and uniformity of a trained key pair")
    p.add_argument("--enc-key", required=True)
    p.add_argument("--dec-key", required=True)
    p.add_argument("--m", type=int, default=None, help="bins (default: from the key)")
    _add_data_flags(p)

    p = add("sweep", cmd_sweep, "train one model per alpha and tabulate MSE and theta", force=True)
    _add_model_flags(p, alpha=False)
    _add_data_flags(p)
    p.add_argument("--alphas", type=_alphas, default=_alphas("0.1:1.0:0.1"), help="start:end:step or a,b,c (default 0.1:1.0:0.1)")
    p.add_argument("--holdout", type=float, default=0.2, help="held-out share for evaluation (default 0.2)")
    p.add_argument("--out", default=None, help="CSV report path")

    p = add("uniformity", cmd_uniformity, "chi-squared uniformity verdict for a list of numbers", seed=False)
    p.add_argument("--in", dest="input", required=True, help="whitespace/comma-separated numbers, or - for stdin")
    p.add_argument("--m", type=int, default=16, help="bins (default 16)")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("pqcnn: error: a command is required", file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = default_seed()
        return args.func(args)
    except (CommandError, ValueError, OSError, ArithmeticError) as exc:
        print(f"pqcnn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
