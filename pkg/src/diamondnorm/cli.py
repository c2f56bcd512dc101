"""Command-line front end.

Channel files are UTF-8 JSON. Complex entries are ``[re, im]`` pairs::

    {"dim_v": 2, "dim_a": 1, "B": [[[1, 0], [0, 0]], ...], "C": [...],
     "metadata": {"U": "<json matrix>", "V": "<json matrix>"}}

Natural and Choi files carry ``{"representation": ..., "dim_v": N, "matrix": [...]}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .matkernel import InvalidInputError
from .objective import PrecisionError
from .solver import BudgetExceededError, SolverConfig, diamond_norm
from .superop import (
    NaturalRep,
    StinespringPair,
    choi_from_natural,
    is_power_of_two,
    natural_from_stinespring,
    stinespring_from_natural,
)
from .verify import BruteForceConfig, bruteforce_diamond, unitary_diamond

logger = logging.getLogger("diamondnorm")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_UNCERTIFIED = 0, 1, 2, 3
METHODS = ("convex", "bruteforce", "unitary-formula")


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0.1.0"


def encode_complex(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_complex(data, name: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: not a nested array of [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidInputError(f"{name}: expected shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path}: top level must be an object")
    return data


def _dim(data: dict, key: str) -> int:
    val = data.get(key)
    if not isinstance(val, int) or isinstance(val, bool) or val < 1:
        raise InvalidInputError(f"{key} must be a positive integer")
    return val


def read_channel(path: str) -> tuple[StinespringPair, dict]:
    data = _load_json(path)
    dim_v, dim_a = _dim(data, "dim_v"), _dim(data, "dim_a")
    if not is_power_of_two(dim_v):
        raise InvalidInputError(
            f"dim_v={dim_v} is not a power of 2; the Pauli-coordinate chart assumes N = 2**n"
        )
    for key in ("B", "C"):
        if key not in data:
            raise InvalidInputError(f"missing {key}")
    pair = StinespringPair(dim_v, dim_a, decode_complex(data["B"], "B"), decode_complex(data["C"], "C"))
    meta = data.get("metadata") or {}
    if not isinstance(meta, dict):
        raise InvalidInputError("metadata must be an object")
    return pair, meta


def channel_document(p: StinespringPair, metadata: dict | None = None) -> dict:
    doc = {
        "representation": "stinespring",
        "dim_v": p.dim_v,
        "dim_a": p.dim_a,
        "B": encode_complex(p.B),
        "C": encode_complex(p.C),
    }
    if metadata:
        doc["metadata"] = {k: v if isinstance(v, str) else json.dumps(v) for k, v in metadata.items()}
    return doc


def write_channel(path: str, p: StinespringPair, metadata: dict | None = None) -> None:
    _write_json(path, channel_document(p, metadata))


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def _metadata_matrix(meta: dict, key: str) -> np.ndarray:
    if key not in meta:
        raise InvalidInputError(f"unitary-formula needs metadata[{key!r}]")
    val = meta[key]
    if isinstance(val, str):
        try:
            val = json.loads(val)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"metadata[{key!r}] is not a JSON matrix") from exc
    return decode_complex(val, f"metadata[{key!r}]")


def run_compute(p, epsilon, method, seed=0, output_format="json", out=None, meta=None, timing=True) -> int:
    """Compute one result record for a pair and print it; returns the exit code."""
    out = out or sys.stdout
    start = time.perf_counter()
    record = {
        "value": None,
        "epsilon": float(epsilon),
        "method": method,
        "iterations": 0,
        "wall_time_s": 0.0,
        "constants": None,
        "certified_gap": None,
        "uncertified": False,
        "tool_version": tool_version(),
    }
    code = EXIT_OK
    if method == "convex":
        try:
            res = diamond_norm(p, epsilon, SolverConfig(epsilon=epsilon, seed=seed))
            rep = res.report
            record["value"] = res.value
            if res.constants is not None:
                record["constants"] = {
                    "M": res.constants.M,
                    "alpha": res.constants.alpha,
                    "eps_prime": float(res.constants.eps_prime),
                }
        except BudgetExceededError as exc:
            rep = exc.report
            record["value"] = max(0.0, -rep.opt_value) if np.isfinite(rep.opt_value) else 0.0
            record["uncertified"] = True
            print(f"error: {exc}", file=sys.stderr)
            code = EXIT_UNCERTIFIED
        record["iterations"] = rep.iterations
        record["certified_gap"] = rep.certified_gap
    elif method == "bruteforce":
        record["value"] = bruteforce_diamond(p, BruteForceConfig(seed=seed))
    elif method == "unitary-formula":
        meta = meta or {}
        record["value"] = unitary_diamond(_metadata_matrix(meta, "U"), _metadata_matrix(meta, "V"))
    else:
        raise InvalidInputError(f"method must be one of {METHODS}")
    if timing:
        record["wall_time_s"] = time.perf_counter() - start
    if output_format == "json":
        print(json.dumps(record, sort_keys=True), file=out)
    else:
        flag = " (uncertified)" if record["uncertified"] else ""
        print(
            f"diamond norm = {record['value']:.10g} +/- {epsilon:g}{flag}\n"
            f"method = {method}, iterations = {record['iterations']}, "
            f"wall time = {record['wall_time_s']:.3f} s",
            file=out,
        )
    return code


def cmd_compute(args) -> int:
    pair, meta = read_channel(args.input)
    if not args.epsilon > 0:
        raise InvalidInputError("--epsilon must be positive")
    return run_compute(
        pair, args.epsilon, args.method, args.seed, args.output, meta=meta, timing=not args.no_timing
    )


def cmd_convert(args) -> int:
    data = _load_json(args.input)
    if args.from_ == "stinespring":
        pair, meta = read_channel(args.input)
        nat = natural_from_stinespring(pair)
    else:
        dim_v = _dim(data, "dim_v")
        if not is_power_of_two(dim_v):
            raise InvalidInputError(f"dim_v={dim_v} is not a power of 2")
        if "matrix" not in data:
            raise InvalidInputError("missing matrix")
        nat = NaturalRep(dim_v, decode_complex(data["matrix"], "matrix"))
        meta = data.get("metadata") or {}
    if args.to == "stinespring":
        doc = channel_document(stinespring_from_natural(nat), meta)
    elif args.to == "natural":
        doc = {"representation": "natural", "dim_v": nat.dim_v, "matrix": encode_complex(nat.matrix)}
    else:
        choi = choi_from_natural(nat)
        doc = {"representation": "choi", "dim_v": choi.dim_v, "matrix": encode_complex(choi.matrix)}
    _write_json(args.output, doc)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .acceptance import run

    results = run(args.scale, out=sys.stdout, fault=args.inject_fault)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diamondnorm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="approximate the diamond norm of a channel file")
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--method", choices=METHODS, default="convex")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", choices=("json", "text"), default="json")
    p.add_argument("--no-timing", action="store_true", help="report wall_time_s as 0 for reproducible output")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("convert", help="convert between super-operator representations")
    p.add_argument("--input", required=True)
    p.add_argument("--from", dest="from_", choices=("stinespring", "natural"), required=True)
    p.add_argument("--to", choices=("stinespring", "natural", "choi"), required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--scale", choices=("quick", "full"), default="quick")
    p.add_argument("--inject-fault", choices=("constants",), default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PrecisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED


if __name__ == "__main__":
    sys.exit(main())
