"""
Command-line front end and the JSON operator file format.

Operator files look like::

    {
      "block_size": 1,
      "window": [0, 2],
      "exact_interior": [0, 2],
      "diagonals": {
        "1": [
          [[[1, 0]]],
          [[[2, 0]]],
          [[[3, 0]]]
        ]
      }
    }

Each diagonal lists one m x m block per column of the window, entries as
[re, im] pairs. Writers emit offsets in ascending order and floats with 17
significant digits, so reading and rewriting a canonical file reproduces it
byte for byte.

Exit codes: 0 ok, 1 verification failed, 2 parse error, 3 block size
mismatch, 4 not positive definite, 5 no stabilization, 6 domain error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .algebra import BlockSizeError, NotSelfAdjointError, adjoint, multiply, norms
from .diag_core import Diagonal, IndexWindow, NSOperator
from .factorization import (NotUniformlyPositiveError, StabilizationError, report_from_factor,
                            spectral_factor, verify_factorization)
from .zadeh import DomainError, zadeh_eval

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_DIM, EXIT_POSITIVE, EXIT_STABLE, EXIT_DOMAIN = range(7)

log = logging.getLogger("nswiener")


class OperatorFileError(ValueError):
    """Malformed operator file; the message names the offending key."""


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise OperatorFileError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _window(value, key):
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in value)):
        raise OperatorFileError(f"{key!r} must be a pair of integers [lo, hi]")
    try:
        return IndexWindow(*value)
    except ValueError as exc:
        raise OperatorFileError(f"{key!r}: {exc}") from None


def operator_from_dict(doc) -> NSOperator:
    if not isinstance(doc, dict):
        raise OperatorFileError("top level must be a JSON object")
    for key in ("block_size", "window", "diagonals"):
        if key not in doc:
            raise OperatorFileError(f"missing key {key!r}")
    m = doc["block_size"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise OperatorFileError("'block_size' must be a positive integer")
    window = _window(doc["window"], "window")
    interior = doc.get("exact_interior", "missing")
    if interior == "missing":
        interior = window
    elif interior is not None:
        interior = _window(interior, "exact_interior")
    diags_doc = doc["diagonals"]
    if not isinstance(diags_doc, dict):
        raise OperatorFileError("'diagonals' must be an object keyed by offset")
    diags = {}
    for key, blocks in diags_doc.items():
        try:
            n = int(key)
        except ValueError:
            raise OperatorFileError(f"diagonal key {key!r} is not an integer offset") from None
        if n in diags:
            raise OperatorFileError(f"duplicate offset {key!r}")
        try:
            arr = np.asarray(blocks, dtype=float)
        except (TypeError, ValueError):
            raise OperatorFileError(f"diagonals[{key!r}] is not a numeric array") from None
        if arr.shape != (len(window), m, m, 2):
            raise OperatorFileError(
                f"diagonals[{key!r}] has shape {arr.shape}, expected {(len(window), m, m, 2)}")
        if not np.all(np.isfinite(arr)):
            raise OperatorFileError(f"diagonals[{key!r}] contains non-finite values")
        diags[n] = Diagonal(window, arr[..., 0] + 1j * arr[..., 1])
    return NSOperator(m, diags, window, interior)


def read_operator(path) -> NSOperator:
    try:
        with open(path) as fh:
            doc = json.load(fh, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise OperatorFileError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise OperatorFileError(f"{path}: {exc.strerror}") from None
    try:
        return operator_from_dict(doc)
    except OperatorFileError as exc:
        raise OperatorFileError(f"{path}: {exc}") from None


def _num(x: float) -> str:
    s = "%.17g" % x
    if not np.isfinite(x):
        raise ValueError("cannot serialize non-finite value")
    return s


def _block(b: np.ndarray) -> str:
    rows = ", ".join("[" + ", ".join(f"[{_num(v.real)}, {_num(v.imag)}]" for v in row) + "]"
                     for row in b)
    return "[" + rows + "]"


def format_operator(F: NSOperator) -> str:
    """Canonical text of an operator file."""
    w = F.window
    ei = "null" if F.exact_interior is None else f"[{F.exact_interior.lo}, {F.exact_interior.hi}]"
    lines = ["{",
             f'  "block_size": {F.m},',
             f'  "window": [{w.lo}, {w.hi}],',
             f'  "exact_interior": {ei},']
    if not F.diagonals:
        lines.append('  "diagonals": {}')
    else:
        lines.append('  "diagonals": {')
        items = list(F.diagonals)
        for k, n in enumerate(items):
            blocks = F.blocks_on(n, w)
            lines.append(f'    "{n}": [')
            lines.append(",\n".join("      " + _block(b) for b in blocks))
            lines.append("    ]" + ("," if k < len(items) - 1 else ""))
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_operator(F: NSOperator, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_operator(F))


def _parse_z(text):
    try:
        re_, im = (float(p) for p in text.split(","))
    except ValueError:
        raise OperatorFileError(f"--z must be 're,im', got {text!r}") from None
    return complex(re_, im)


def _parse_floats(text):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise OperatorFileError(f"--t-samples must be comma-separated numbers, got {text!r}") from None


def _parse_window(text):
    try:
        lo, hi = (int(p) for p in text.split(","))
        return IndexWindow(lo, hi)
    except ValueError:
        raise OperatorFileError(f"--window must be 'lo,hi', got {text!r}") from None


def cmd_multiply(args):
    A, B = read_operator(args.a), read_operator(args.b)
    write_operator(multiply(A, B), args.out)
    return EXIT_OK


def cmd_adjoint(args):
    write_operator(adjoint(read_operator(args.path)), args.out)
    return EXIT_OK


def cmd_norm(args):
    print(json.dumps(norms(read_operator(args.path)).as_dict()))
    return EXIT_OK


def cmd_zadeh(args):
    F = read_operator(args.path)
    ev = zadeh_eval(F, _parse_z(args.z))
    write_operator(ev.result.pruned(), args.out)
    return EXIT_OK


def cmd_factor(args):
    W = read_operator(args.w)
    window = _parse_window(args.window) if args.window else None
    try:
        report = spectral_factor(W, pad=args.pad, tol=args.tol, window=window,
                                 eps_tail=args.eps_tail)
    except NotUniformlyPositiveError as exc:
        print(f"not positive definite: certificate {exc.certificate!r}", file=sys.stderr)
        return EXIT_POSITIVE
    except StabilizationError as exc:
        print(f"stabilization failure: gap {exc.gap!r} (tol {exc.tol!r})", file=sys.stderr)
        return EXIT_STABLE
    write_operator(report.factor, f"{args.out_prefix}.factor.json")
    write_operator(report.inverse_factor, f"{args.out_prefix}.inverse.json")
    check = verify_factorization(W, report, _parse_floats(args.t_samples))
    doc = {**report.summary(), "verification": check.as_dict()}
    with open(f"{args.out_prefix}.report.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK if check.passed else EXIT_VERIFY


def cmd_verify(args):
    W, U = read_operator(args.w), read_operator(args.factor)
    if W.m != U.m:
        raise BlockSizeError(f"block size mismatch: {W.m} vs {U.m}")
    t_samples = _parse_floats(args.t_samples)
    report = report_from_factor(W, U.pruned(), pad=args.pad, tol=args.tol)
    check = verify_factorization(W, report, t_samples)
    print(json.dumps({"t_samples": t_samples, **check.as_dict()}, sort_keys=True))
    return EXIT_OK if check.passed else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="nswiener",
                                description="Diagonal-expansion operator algebra and spectral factorization.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("multiply", help="product of two operators")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("out")
    s.set_defaults(func=cmd_multiply)

    s = sub.add_parser("adjoint", help="adjoint of an operator")
    s.add_argument("path")
    s.add_argument("out")
    s.set_defaults(func=cmd_adjoint)

    s = sub.add_parser("norm", help="print Wiener, Hilbert-Schmidt and operator norms as JSON")
    s.add_argument("path")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("zadeh", help="evaluate the Zadeh transform at z")
    s.add_argument("path")
    s.add_argument("out")
    s.add_argument("--z", required=True, help="complex point as 're,im'")
    s.set_defaults(func=cmd_zadeh)

    s = sub.add_parser("factor", help="spectral factorization W = U* U")
    s.add_argument("w")
    s.add_argument("out_prefix")
    s.add_argument("--pad", type=int, default=None, help="padding (default 4 x support width)")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--eps-tail", type=float, default=1e-10)
    s.add_argument("--window", default=None, help="target window 'lo,hi' (default: W's window)")
    s.add_argument("--t-samples", default="0,1.0,2.5")
    s.set_defaults(func=cmd_factor)

    s = sub.add_parser("verify", help="check a factor against W")
    s.add_argument("w")
    s.add_argument("factor")
    s.add_argument("--t-samples", default="0,1.0,2.5")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--pad", type=int, default=None)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OperatorFileError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BlockSizeError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except (DomainError, NotSelfAdjointError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
