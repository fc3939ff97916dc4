"""Command-line front end.

Subcommands: orbits, hecke, gelfand, dynamics, find-sr.  All reports carry
the certification depth/radius they were computed at.  Exit codes: 0 success
(and consistent verdicts), 1 inconsistent verdict, 2 input error, 3
budget/radius errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import gelfand, group, hecke, tree
from .group import LocalGroup, ORBIT_TABLE_FORMAT_VERSION, OrbitTable, ParseError
from .perms import parse_perm
from .tree import (
    BudgetExhausted,
    InsufficientRadius,
    NotHyperbolic,
    ROOT,
    TreeEnd,
    TreeVertex,
)

CACHE_ENV = "BUILDING_FORGE_CACHE"
DEFAULT_CACHE = ".building-forge-cache"


class CacheInvalid(RuntimeError):
    """A cache file failed validation; the caller recomputes, never guesses."""


@dataclass
class RunConfig:
    group_file: str
    radius: int
    budget: int
    cache_dir: Path
    output_format: str
    local_group: LocalGroup


def load_config(args) -> RunConfig:
    path = Path(args.group)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read group file {path}: {exc}")
    F = group.parse_local_group(text)
    if args.radius < 0:
        raise ParseError("radius must be non-negative")
    cache_dir = Path(args.cache or os.environ.get(CACHE_ENV, DEFAULT_CACHE))
    return RunConfig(
        group_file=str(path),
        radius=args.radius,
        budget=args.budget,
        cache_dir=cache_dir,
        output_format=args.format,
        local_group=F,
    )


# ---------------------------------------------------------------------------
# orbit cache


def cache_path(cfg: RunConfig) -> Path:
    key = cfg.local_group.hash_key()[:16]
    return cfg.cache_dir / f"orbits_d{cfg.local_group.degree}_{key}_r{cfg.radius}.json"


def validate_cached(text: str, cfg: RunConfig) -> None:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CacheInvalid(f"cache is not valid JSON: {exc.msg}")
    if not isinstance(doc, dict):
        raise CacheInvalid("cache root must be an object")
    if doc.get("format_version") != ORBIT_TABLE_FORMAT_VERSION:
        raise CacheInvalid(f"unsupported cache format_version {doc.get('format_version')}")
    if doc.get("degree") != cfg.local_group.degree:
        raise CacheInvalid("cache degree does not match the group")
    if doc.get("generator_hash") != cfg.local_group.hash_key():
        raise CacheInvalid("cache generator hash does not match the group")
    if doc.get("radius") != cfg.radius:
        raise CacheInvalid("cache radius does not match the request")


def load_or_build_table(cfg: RunConfig) -> tuple[OrbitTable, bool]:
    """(table, cache_hit). A corrupt cache is recomputed and rewritten."""
    path = cache_path(cfg)
    table = group.orbit_table(cfg.local_group, cfg.radius)
    serialized = table.to_json()
    if path.exists():
        try:
            text = path.read_text()
            validate_cached(text, cfg)
            if text != serialized:
                raise CacheInvalid("cache content differs from recomputation")
            return table, True
        except CacheInvalid as exc:
            print(f"warning: {exc}; recomputing", file=sys.stderr)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialized)
    return table, False


# ---------------------------------------------------------------------------
# rendering


def emit_json(doc: dict) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def emit_csv(rows: list[dict], fieldnames: list[str]) -> None:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=fieldnames)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    sys.stdout.write(out.getvalue())


def emit_md_table(rows: list[dict], fieldnames: list[str]) -> None:
    print("| " + " | ".join(fieldnames) + " |")
    print("|" + "|".join(" --- " for _ in fieldnames) + "|")
    for row in rows:
        print("| " + " | ".join(str(row[f]) for f in fieldnames) + " |")


def word_str(w) -> str:
    return " ".join(map(str, w))


# ---------------------------------------------------------------------------
# subcommands


def cmd_orbits(args) -> int:
    cfg = load_config(args)
    table, hit = load_or_build_table(cfg)
    rows = [
        {
            "distance": c.distance,
            "representative": word_str(c.representative),
            "size": c.size,
        }
        for c in table.classes
    ]
    if cfg.output_format == "json":
        emit_json(
            {
                "format_version": ORBIT_TABLE_FORMAT_VERSION,
                "command": "orbits",
                "degree": table.degree,
                "generator_hash": table.generator_hash,
                "radius": table.radius,
                "sphere_counts": table.sphere_counts(),
                "classes": rows,
                "cache_hit": hit,
                "cache_path": str(cache_path(cfg)),
            }
        )
    elif cfg.output_format == "csv":
        emit_csv(rows, ["distance", "representative", "size"])
    else:
        print(f"orbit classes, radius {table.radius}, sphere counts {table.sphere_counts()}")
        emit_md_table(rows, ["distance", "representative", "size"])
    return 0


def cmd_hecke(args) -> int:
    cfg = load_config(args)
    sc = hecke.intersection_numbers(cfg.local_group, cfg.radius)
    verdict = hecke.commutativity_of(sc)
    rows = [{"i": i, "j": j, "k": k, "N": n} for (i, j, k, n) in sc.entries()]
    if cfg.output_format == "json":
        emit_json(
            {
                "format_version": hecke.FORMAT_VERSION,
                "command": "hecke",
                "degree": cfg.local_group.degree,
                "generator_hash": cfg.local_group.hash_key(),
                "radius": cfg.radius,
                "verdict": verdict.describe(),
                "orbits": [
                    {
                        "id": o.id,
                        "representative": word_str(o.representative),
                        "distance": o.distance,
                        "valency": o.valency,
                    }
                    for o in sc.orbits
                ],
                "constants": rows,
            }
        )
    elif cfg.output_format == "csv":
        emit_csv(rows, ["i", "j", "k", "N"])
    else:
        print(f"orbit algebra at radius {cfg.radius}: {verdict.describe()}")
        ids = [o.id for o in sc.orbits]
        header = ["i\\j"] + [str(j) for j in ids]
        print("| " + " | ".join(header) + " |")
        print("|" + "|".join(" --- " for _ in header) + "|")
        for i in ids:
            cells = []
            for j in ids:
                if not sc.in_budget(i, j):
                    cells.append(".")
                    continue
                terms = [f"{n}[{k}]" for k, n in sc.products_of(i, j)]
                cells.append(" + ".join(terms) if terms else "0")
            print("| " + " | ".join([str(i)] + cells) + " |")
    return 0


def cmd_gelfand(args) -> int:
    cfg = load_config(args)
    verdict = gelfand.main_theorem_report(cfg.local_group, cfg.radius, cfg.budget)
    doc = verdict.to_dict()
    if cfg.output_format == "json":
        emit_json(doc)
    elif cfg.output_format == "csv":
        flat = {k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in doc.items()}
        emit_csv([flat], list(flat))
    else:
        for key in sorted(doc):
            print(f"- **{key}**: {doc[key]}")
    return 0 if verdict.consistent else 1


def parse_word(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(t) for t in text.replace(",", " ").split())


def parse_automorphism(spec: str, degree: int) -> tree.Portrait:
    """Command-line automorphism forms.

    ``transport:<letters>`` is the color-preserving translation by the given
    word; anything else is a path to a JSON document with fields
    ``base_image`` (word), ``exceptions`` (object: word -> one-line
    permutation) and optional ``extension`` ("sparse" or "constant").
    """
    if spec.startswith("transport:"):
        return tree.parallel_transport(parse_word(spec[len("transport:"):]), degree)
    try:
        doc = json.loads(Path(spec).read_text())
        base = TreeVertex(parse_word(doc["base_image"]))
        table = {
            parse_word(k): parse_perm(v, degree)
            for k, v in doc.get("exceptions", {}).items()
        }
        extension = doc.get("extension", tree.EXTEND_SPARSE)
        return tree.TablePortrait(base, table, degree, extension)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ParseError(f"bad automorphism spec {spec!r}: {exc}")


def parse_end(spec: str) -> TreeEnd:
    """Ends are written "<prefix>:<period>" with comma/space separated colors."""
    if ":" not in spec:
        raise ParseError(f"bad end spec {spec!r}: expected 'prefix:period'")
    pre, per = spec.split(":", 1)
    try:
        return TreeEnd(parse_word(pre), parse_word(per))
    except ValueError as exc:
        raise ParseError(f"bad end spec {spec!r}: {exc}")


def cmd_dynamics(args) -> int:
    cfg = load_config(args)
    degree = cfg.local_group.degree
    a = parse_automorphism(args.auto, degree)
    xi = parse_end(args.end)
    cls = tree.classify_isometry(a, tree.default_search_radius(a))
    if not cls.is_hyperbolic:
        raise NotHyperbolic("dynamics needs a hyperbolic automorphism")
    if xi == cls.axis.end_minus:
        raise ParseError("the chosen end is the repelling fixed end")
    rows = []
    current = xi
    for n in range(1, args.nmax + 1):
        current = a.image_of_end(current)
        depth = (
            current.agreement_depth(cls.axis.end_plus)
            if current != cls.axis.end_plus
            else -1
        )
        overlap = tree.segment_through_apartment(a, ROOT, ROOT, n)
        rows.append({"n": n, "agreement_depth": depth, "axis_overlap": overlap})
    doc = {
        "format_version": 1,
        "command": "dynamics",
        "degree": degree,
        "translation_length": cls.length,
        "certification_radius": tree.default_search_radius(a),
        "nmax": args.nmax,
        "rows": rows,
        "note": "agreement_depth -1 means the iterate equals the attracting end",
    }
    if cfg.output_format == "json":
        emit_json(doc)
    elif cfg.output_format == "csv":
        emit_csv(rows, ["n", "agreement_depth", "axis_overlap"])
    else:
        print(f"hyperbolic of length {cls.length}; iterating toward the attracting end")
        emit_md_table(rows, ["n", "agreement_depth", "axis_overlap"])
    return 0


def cmd_find_sr(args) -> int:
    cfg = load_config(args)
    load_or_build_table(cfg)  # warm/validate the orbit cache for this group
    g = gelfand.find_strongly_regular(cfg.local_group, cfg.budget)
    cls = tree.classify_isometry(g, tree.default_search_radius(g))
    doc = {
        "format_version": 1,
        "command": "find-sr",
        "degree": cfg.local_group.degree,
        "budget": cfg.budget,
        "base_image": word_str(g.base_image.word),
        "portrait_support": "color-preserving transport (empty exception table)",
        "translation_length": cls.length,
        "axis_prefix_plus": word_str(cls.axis.end_plus.word_prefix(10)),
        "axis_prefix_minus": word_str(cls.axis.end_minus.word_prefix(10)),
    }
    if cfg.output_format == "json":
        emit_json(doc)
    elif cfg.output_format == "csv":
        emit_csv([doc], list(doc))
    else:
        for key, val in doc.items():
            print(f"- **{key}**: {val}")
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="building-forge",
        description="orbit tables, Hecke structure constants and Gelfand-pair "
        "verdicts for universal groups acting on colored trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, radius_default):
        p.add_argument("--group", required=True, help="path to a group document (JSON)")
        p.add_argument("--radius", type=int, default=radius_default)
        p.add_argument("--budget", type=int, default=6)
        p.add_argument("--cache", default=None, help=f"cache dir (or ${CACHE_ENV})")
        p.add_argument("--format", choices=["json", "csv", "md"], default="json")

    p = sub.add_parser("orbits", help="stabilizer orbit tables on a ball")
    common(p, radius_default=4)
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("hecke", help="intersection numbers and commutativity")
    common(p, radius_default=4)
    p.set_defaults(func=cmd_hecke)

    p = sub.add_parser("gelfand", help="the full three-way verdict")
    common(p, radius_default=3)
    p.set_defaults(func=cmd_gelfand)

    p = sub.add_parser("dynamics", help="iteration of an end under a hyperbolic")
    common(p, radius_default=3)
    p.add_argument("--auto", required=True, help="automorphism spec (transport:... or JSON file)")
    p.add_argument("--end", required=True, help="end spec 'prefix:period'")
    p.add_argument("--nmax", type=int, default=8)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("find-sr", help="find a hyperbolic element by pigeonhole")
    common(p, radius_default=3)
    p.set_defaults(func=cmd_find_sr)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        loc = f" (line {exc.line}, column {exc.column})" if exc.line else ""
        print(f"error: {exc}{loc}", file=sys.stderr)
        return 2
    except (BudgetExhausted, InsufficientRadius, hecke.OutOfBudget) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NotHyperbolic, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
