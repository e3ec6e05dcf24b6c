"""Command line frontend with JSON reports and an on-disk cache.

Each subcommand parses its arguments into a RunConfig, dispatches to
the library, and prints one ReportDocument to standard output.  The
document is byte-stable for identical inputs and code versions apart
from the timing field.  Exit codes: 0 success, 1 usage error, 2 a
violated hypothesis, 3 an internal oracle mismatch.

The cache stores one directory per (command, field, modulus spec, code
version) under a sha256 key: a JSON manifest holding the ray class
tables and the computed result, plus the big matrices in the plain
text format of the linear algebra layer.  Reads and writes take an
advisory lock on a file beside the key directories.
"""

from __future__ import annotations

import argparse
import fcntl
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .cohomology import sweep_torsion_law
from .distribution import (
    HypothesisFailed,
    OracleMismatch,
    build_presentation,
    iwasawa_matrix,
    level_torsion,
    search_torsex,
    torsex_certificate,
    torsion_bound,
)
from .groupring import NotCoprimeToW
from .quadfield import Modulus, QuadField, make_field
from .rayclass import ray_class_group
from .zlinalg import IntMatrix, OrdistError

SCHEMA = "ordist/1"


class UsageError(OrdistError):
    pass


@dataclass
class RunConfig:
    """Parsed command line options shared by all subcommands."""

    d: int
    modulus_spec: str | None = None
    prime_specs: tuple[str, ...] = ()
    norm_bound: int = 0
    cache_dir: Path | None = None
    fmt: str = "json"
    verbose: int = 0
    slow: bool = False


@dataclass
class ReportDocument:
    """What a subcommand prints: input echo, field data, result."""

    command: tuple[str, ...]
    field: dict
    result: dict
    timing_ms: int

    def payload(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": list(self.command),
            "field": self.field,
            "result": self.result,
            "timing_ms": self.timing_ms,
        }


def _note(cfg: RunConfig, msg: str) -> None:
    if cfg.verbose:
        print(msg, file=sys.stderr)


# argument parsing


def _parse_prime(K: QuadField, item: str, allow_exponent: bool):
    """One prime spec: p:<q>[:<index>[:<exponent>]] (or bare for -p)."""
    parts = item.split(":")
    if parts and parts[0] in ("p", "q"):
        parts = parts[1:]
    limit = 3 if allow_exponent else 2
    if not 1 <= len(parts) <= limit or not all(parts):
        raise UsageError(f"bad prime spec {item!r}")
    try:
        nums = [int(x) for x in parts]
    except ValueError:
        raise UsageError(f"bad prime spec {item!r}")
    q = nums[0]
    idx = nums[1] if len(nums) > 1 else 0
    exp = nums[2] if len(nums) > 2 else 1
    if q < 2 or idx < 0 or exp < 1:
        raise UsageError(f"bad prime spec {item!r}")
    kind, ids = K.splitting_type(q)
    if idx >= len(ids):
        raise UsageError(
            f"prime {q} has {len(ids)} ideal(s) above it, index {idx} "
            f"is out of range")
    return ids[idx], exp


def _parse_modulus(K: QuadField, spec: str | None) -> Modulus:
    if spec is None or spec in ("1", "(1)", ""):
        return Modulus(K, ())
    pairs = [_parse_prime(K, item, allow_exponent=True)
             for item in spec.split(",")]
    try:
        return Modulus(K, tuple(pairs))
    except OrdistError as exc:
        raise UsageError(str(exc))


def _field_block(K: QuadField) -> dict:
    return {"disc": K.disc, "h": K.h, "w": K.w_K}


# cache plumbing


def _cache_key(command: str, d: int, spec: str) -> str:
    raw = f"{command}|{d}|{spec}|{__version__}"
    return hashlib.sha256(raw.encode()).hexdigest()


class Cache:
    """Advisory-locked directory of manifests and text matrices."""

    def __init__(self, root: Path | None):
        self.root = root

    def _lock(self, exclusive: bool):
        self.root.mkdir(parents=True, exist_ok=True)
        fh = open(self.root / ".lock", "a+")
        fcntl.flock(fh, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
        return fh

    def load(self, command: str, d: int, spec: str) -> dict | None:
        if self.root is None:
            return None
        key = _cache_key(command, d, spec)
        path = self.root / key / "manifest.json"
        if not path.exists():
            return None
        with self._lock(exclusive=False) as fh:
            manifest = json.loads(path.read_text())
            fcntl.flock(fh, fcntl.LOCK_UN)
        if manifest.get("schema") != SCHEMA:
            return None
        return manifest

    def store(self, command: str, d: int, spec: str, manifest: dict,
              matrices: dict[str, IntMatrix] = ()) -> None:
        if self.root is None:
            return
        key = _cache_key(command, d, spec)
        manifest = {"schema": SCHEMA, "version": __version__,
                    "command": command, "d": d, "spec": spec, **manifest}
        with self._lock(exclusive=True) as fh:
            folder = self.root / key
            folder.mkdir(parents=True, exist_ok=True)
            for name, mat in dict(matrices or {}).items():
                (folder / f"{name}.mat").write_text(mat.to_text())
            tmp = folder / "manifest.json.tmp"
            tmp.write_text(json.dumps(manifest, sort_keys=True, indent=2))
            tmp.rename(folder / "manifest.json")
            fcntl.flock(fh, fcntl.LOCK_UN)


# subcommands


def cmd_field(cfg: RunConfig, K: QuadField, cache: Cache) -> dict:
    return _field_block(K)


def cmd_rayclass(cfg: RunConfig, K: QuadField, cache: Cache) -> dict:
    spec = cfg.modulus_spec or "(1)"
    hit = cache.load("rayclass", cfg.d, spec)
    if hit is not None:
        _note(cfg, "cache hit")
        return hit["result"]
    m = _parse_modulus(K, cfg.modulus_spec)
    G = ray_class_group(K, m)
    result = {
        "modulus": m.label(),
        "norm": m.norm(),
        "order": G.group.order,
        "invariant_factors": list(G.group.torsion),
        "inertia_orders": {Modulus(K, ((p, 1),)).label(): G.inertia(p).order
                           for p, _ in m.primes},
    }
    cache.store("rayclass", cfg.d, spec, {
        "field": _field_block(K), "result": result})
    return result


def cmd_torsion(cfg: RunConfig, K: QuadField, cache: Cache) -> dict:
    spec = cfg.modulus_spec or "(1)"
    hit = cache.load("torsion", cfg.d, spec)
    if hit is not None:
        _note(cfg, "cache hit")
        return hit["result"]
    m = _parse_modulus(K, cfg.modulus_spec)
    _note(cfg, "building presentation")
    P = build_presentation(K, m)
    _note(cfg, f"{P.n_gens} generators, {P.relations.rows} relations")
    F = iwasawa_matrix(P)
    tor = level_torsion(P)
    product_bound, borne = torsion_bound(P)
    result = {
        "modulus": m.label(),
        "generators": P.n_gens,
        "relations": P.relations.rows,
        "rank": P.ray(m).group.order,
        "torsion_invariants": list(tor.invariant_factors),
        "product_bound": product_bound,
        "borne": borne,
    }
    cache.store("torsion", cfg.d, spec, {
        "field": _field_block(K),
        "levels": [{"label": u.label(),
                    "invariant_factors": list(P.ray(u).group.torsion)}
                   for u in P.levels],
        "transform_scale": P.transform_scale,
        "result": result,
    }, {"relations": P.relations, "transform": F})
    return result


def cmd_certify(cfg: RunConfig, K: QuadField, cache: Cache) -> dict:
    spec = ",".join(cfg.prime_specs)
    hit = cache.load("certify", cfg.d, spec)
    if hit is not None:
        _note(cfg, "cache hit")
        return hit["result"]
    primes = [_parse_prime(K, s, allow_exponent=False)[0]
              for s in cfg.prime_specs]
    _note(cfg, "building certificate")
    cert = torsex_certificate(K, *primes)
    m = Modulus(K, tuple((p, 1) for p in primes))
    result = {
        "modulus": m.label(),
        "primes": [p.norm() for p in primes],
        "in_kernel": cert.in_kernel,
        "nu_R": cert.nu_R,
        "nu_odd": cert.nu_R % 2 == 1,
        "nu_parity_of_U": cert.nu_parity_of_U,
        "conclusion": cert.conclusion,
    }
    if not cert.conclusion:
        raise OracleMismatch(
            "hypotheses hold but the certificate failed to verify: "
            + json.dumps(result, sort_keys=True))
    cache.store("certify", cfg.d, spec, {
        "field": _field_block(K), "result": result},
        {"R": IntMatrix.from_rows([list(cert.R)], len(cert.R))})
    return result


def cmd_search(cfg: RunConfig, K: QuadField, cache: Cache) -> dict:
    triples = search_torsex(K, cfg.norm_bound)
    return {
        "norm_bound": cfg.norm_bound,
        "count": len(triples),
        "triples": [[Modulus(K, ((p, 1),)).label() for p in trio]
                    for trio in triples],
    }


def cmd_toralg_sweep(cfg: RunConfig, K: QuadField, cache: Cache) -> dict:
    max_m = 5 if cfg.slow else 4
    summary = []
    all_hold = True
    for ell in (2, 3):
        records = sweep_torsion_law(ell, max_m)
        holds = all(r["law_holds"] for r in records)
        all_hold = all_hold and holds
        summary.append({"ell": ell, "cases": len(records),
                        "law_holds": holds})
    if not all_hold:
        raise OracleMismatch("synthetic torsion law failed: "
                             + json.dumps(summary, sort_keys=True))
    return {"max_primes": max_m, "sweeps": summary}


# driver

_COMMANDS = {
    "field": cmd_field,
    "rayclass": cmd_rayclass,
    "torsion": cmd_torsion,
    "certify": cmd_certify,
    "search": cmd_search,
    "toralg-sweep": cmd_toralg_sweep,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ordist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_field=True):
        if needs_field:
            p.add_argument("-d", type=int, required=True,
                           help="positive squarefree d for Q(sqrt(-d))")
        p.add_argument("--format", choices=("json", "text"),
                       default="json", dest="fmt")
        p.add_argument("-v", "--verbose", action="count", default=0)
        p.add_argument("--cache-dir", type=Path, default=None)
        p.add_argument("--no-cache", action="store_true")

    p = sub.add_parser("field", help="class number and unit count")
    common(p)
    p = sub.add_parser("rayclass", help="ray class group of a modulus")
    common(p)
    p.add_argument("-m", dest="modulus", default=None,
                   help="comma list of p:<q>[:<index>[:<exponent>]]")
    p = sub.add_parser("torsion",
                       help="presentation, torsion and bounds of a level")
    common(p)
    p.add_argument("-m", dest="modulus", default=None,
                   help="comma list of p:<q>[:<index>[:<exponent>]]")
    p = sub.add_parser("certify",
                       help="explicit 2-torsion certificate for 3 primes")
    common(p)
    p.add_argument("-p", dest="primes", action="append", default=[],
                   metavar="Q[:INDEX]",
                   help="rational prime with optional ideal index, 3 times")
    p = sub.add_parser("search", help="enumerate admissible prime triples")
    common(p)
    p.add_argument("-B", "--norm-bound", type=int, default=50)
    p = sub.add_parser("toralg-sweep",
                       help="synthetic cohomology torsion law sweep")
    common(p, needs_field=False)
    p.add_argument("--slow", action="store_true",
                   help="extend the sweep by one more prime")
    return parser


def _config(args) -> RunConfig:
    cache_dir = None
    if not args.no_cache:
        if args.cache_dir is not None:
            cache_dir = args.cache_dir
        elif os.environ.get("ORDIST_CACHE"):
            cache_dir = Path(os.environ["ORDIST_CACHE"])
    if getattr(args, "norm_bound", 0) < 0:
        raise UsageError("norm bound must be positive")
    return RunConfig(
        d=getattr(args, "d", 0),
        modulus_spec=getattr(args, "modulus", None),
        prime_specs=tuple(getattr(args, "primes", ())),
        norm_bound=getattr(args, "norm_bound", 0),
        cache_dir=cache_dir,
        fmt=args.fmt,
        verbose=args.verbose,
        slow=getattr(args, "slow", False),
    )


def _emit(doc: ReportDocument, fmt: str) -> None:
    payload = doc.payload()
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
        return

    def walk(prefix, val):
        if isinstance(val, dict):
            for k in sorted(val, key=str):
                yield from walk(f"{prefix}{k}." if prefix else f"{k}.",
                                val[k])
        else:
            yield f"{prefix.rstrip('.')}: {json.dumps(val)}"

    for line in walk("", payload):
        print(line)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.monotonic_ns()
    try:
        args = _build_parser().parse_args(argv)
        cfg = _config(args)
        if args.command == "certify" and len(cfg.prime_specs) != 3:
            raise UsageError("certify needs exactly three -p primes")
        K = make_field(cfg.d) if args.command != "toralg-sweep" else None
        cache = Cache(cfg.cache_dir)
        result = _COMMANDS[args.command](cfg, K, cache)
    except UsageError as exc:
        print(f"ordist: {exc}", file=sys.stderr)
        return 1
    except (HypothesisFailed, NotCoprimeToW) as exc:
        print(f"ordist: hypothesis failure: {exc}", file=sys.stderr)
        return 2
    except OracleMismatch as exc:
        print(f"ordist: oracle mismatch: {exc}", file=sys.stderr)
        return 3
    except OrdistError as exc:
        print(f"ordist: {exc}", file=sys.stderr)
        return 1
    timing = (time.monotonic_ns() - started) // 1_000_000
    doc = ReportDocument(
        command=tuple(argv),
        field=_field_block(K) if K is not None else {},
        result=result,
        timing_ms=int(timing),
    )
    _emit(doc, cfg.fmt)
    return 0


if __name__ == "__main__":
    sys.exit(main())
