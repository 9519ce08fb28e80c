"""Command-line entry point: ``fukayagen <group> <command> [files] [options]``.

Every command prints a short human report, or the JSON document on
``--json``. Exit codes: 0 when all checks pass, 1 on a failed check or a
malformed file, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from fukayagen import gentle, lattice, linalg, nets, stab, strings, surface, twcx
from fukayagen.config import FIELD_NAMES, Settings, load_settings
from fukayagen.errors import FormatError, FukayagenError

logger = logging.getLogger(__name__)

OK, FAIL, WARN = "✓", "❌", "⚠️"
INPUT_ARGS = ("file", "a", "b", "category", "surface", "word", "net", "rep")


@dataclass
class CommandResult:
    code: int
    text: str
    data: Any = None


# -- loading ---------------------------------------------------------------------


def _load_json(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    except OSError as exc:
        raise FormatError(exc.strerror or str(exc), str(path)) from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object", str(path))
    return doc


def _resolve(path: str, settings: Settings) -> str:
    """A name that is not a file here is looked up under the fixtures directory."""
    if Path(path).exists():
        return path
    candidate = settings.fixtures_dir / path
    return str(candidate) if candidate.exists() else path


def _write(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _presentation(doc: dict) -> tuple[gentle.GentlePresentation, list[gentle.DiskSequence]]:
    """A presentation from a ``surface.v1`` or ``gentle.v1`` document."""
    if doc.get("format") == gentle.FORMAT:
        return gentle.presentation_from_dict(doc)
    if doc.get("format", surface.FORMAT) == surface.FORMAT:
        return gentle.from_ribbon(surface.from_dict(doc))
    if doc.get("format") == stab.FORMAT:
        return stab.sgraph_from_dict(doc).presentation, []
    raise FormatError(f"no presentation in a {doc.get('format')!r} document", "format")


def _category(path: str, K: linalg.Field) -> gentle.Products:
    p, disks = _presentation(_load_json(path))
    return gentle.Products(p, disks, K)


def _complex(path: str, category: gentle.Products | None, K: linalg.Field) -> twcx.TwistedComplex:
    doc = _load_json(path)
    if category is None:
        if "presentation" not in doc:
            raise FormatError("no --category given and no embedded presentation", path)
        p, disks = _presentation(doc["presentation"])
        category = gentle.Products(p, disks, K)
    return twcx.from_dict(doc, category)


def _emit(args: argparse.Namespace, text: str, data: Any, code: int = 0) -> CommandResult:
    return CommandResult(code, text, data if args.json else None)


# -- surface ---------------------------------------------------------------------


def cmd_surface_validate(args: argparse.Namespace, settings: Settings) -> CommandResult:
    g = surface.from_dict(_load_json(args.file))
    report = surface.validate(g)
    issues = [{"location": i.location, "message": i.message} for i in report.issues]
    data = {"ok": report.ok, "issues": issues}
    if report.ok:
        return _emit(args, f"{OK} {args.file}: valid", data)
    lines = [f"{FAIL} {args.file}: {len(report.issues)} issue(s)"]
    lines.extend(f"  {i}" for i in report.issues)
    return _emit(args, "\n".join(lines), data, 1)


def cmd_surface_info(args: argparse.Namespace, settings: Settings) -> CommandResult:
    g = surface.from_dict(_load_json(args.file))
    inv = surface.invariants(g)
    data = {
        "faces": inv.num_faces,
        "boundary_components": inv.num_boundary_components,
        "euler_char": inv.euler_char,
        "genus": inv.genus,
        "unmarked": inv.num_unmarked,
        "full_formal": surface.is_full_formal(g),
    }
    text = "\n".join(f"{k:>20}: {v}" for k, v in data.items())
    return _emit(args, text, data)


# -- category --------------------------------------------------------------------


def cmd_cat_build(args: argparse.Namespace, settings: Settings) -> CommandResult:
    p, disks = _presentation(_load_json(args.file))
    doc = gentle.presentation_to_dict(p, disks)
    text = f"{OK} {len(p.vertices)} objects, {len(p.arrows)} arrows, {len(disks)} disk sequences"
    if args.out:
        _write(args.out, json.dumps(doc, indent=2))
        text += f"\n   written to {args.out}"
    return _emit(args, text, doc)


def cmd_cat_hom(args: argparse.Namespace, settings: Settings) -> CommandResult:
    p, _ = _presentation(_load_json(args.file))
    basis = gentle.hom_basis(p, args.x, args.y, (args.min, args.max))
    data = [{"arrows": list(b.arrows), "degree": b.degree} for b in basis]
    lines = [f"Hom({args.x}, {args.y}) in degrees {args.min}..{args.max}: {len(basis)}"]
    lines.extend(f"  [{b.degree:+d}] {b}" for b in basis)
    return _emit(args, "\n".join(lines), data)


def cmd_cat_check_ainfty(args: argparse.Namespace, settings: Settings) -> CommandResult:
    p, disks = _presentation(_load_json(args.file))
    ok = gentle.verify_a_infinity(p, disks, args.max_len, linalg.field(args.field))
    data = {"ok": ok, "max_len": args.max_len}
    if ok:
        return _emit(args, f"{OK} A∞ relations hold up to length {args.max_len}", data)
    return _emit(args, f"{FAIL} A∞ relations fail", data, 1)


def cmd_cat_check_exact(args: argparse.Namespace, settings: Settings) -> CommandResult:
    p, _ = _presentation(_load_json(args.file))
    verdict = gentle.check_exact(p, args.n_max, linalg.field(args.field))
    data = {
        "exact": verdict,
        "smooth": gentle.is_smooth(p),
        "proper": gentle.is_proper(p),
    }
    if verdict is None:
        return _emit(args, f"{WARN} no failure up to n = {args.n_max}, inconclusive", data)
    if verdict:
        return _emit(args, f"{OK} resolution of the diagonal is exact", data)
    return _emit(args, f"{FAIL} resolution of the diagonal is not exact", data, 1)


# -- twisted complexes and objects ----------------------------------------------


def _category_arg(args: argparse.Namespace) -> gentle.Products | None:
    return _category(args.category, linalg.field(args.field)) if args.category else None


def cmd_tw_minimize(args: argparse.Namespace, settings: Settings) -> CommandResult:
    K = linalg.field(args.field)
    t = _complex(args.file, _category_arg(args), K)
    m = twcx.minimize(t)
    doc = twcx.to_dict(m)
    return _emit(args, f"{OK} {len(t)} summands minimized to {len(m)}", doc)


def cmd_tw_hom(args: argparse.Namespace, settings: Settings) -> CommandResult:
    K = linalg.field(args.field)
    a = _complex(args.a, _category_arg(args), K)
    b = _complex(args.b, a.category, K)
    table = twcx.hom_cohomology(a, b)
    text = "\n".join(f"H^{k:+d}: {v}" for k, v in sorted(table.items())) or "Hom is zero"
    return _emit(args, text, {str(k): v for k, v in sorted(table.items())})


def cmd_tw_iso(args: argparse.Namespace, settings: Settings) -> CommandResult:
    K = linalg.field(args.field)
    a = _complex(args.a, _category_arg(args), K)
    b = _complex(args.b, a.category, K)
    same = twcx.is_isomorphic(a, b, rng=np.random.default_rng(args.seed))
    marker = OK if same else FAIL
    text = f"{marker} {'isomorphic' if same else 'not isomorphic'}"
    return _emit(args, text, {"isomorphic": same}, 0 if same else 1)


def cmd_obj_build(args: argparse.Namespace, settings: Settings) -> CommandResult:
    K = linalg.field(args.field)
    category = _category(args.category, K)
    w = strings.word_from_dict(_load_json(args.file))
    t = strings.word_to_twcx(category, w)
    doc = twcx.to_dict(t)
    return _emit(args, f"{OK} {w}\n   {len(t)} summands, Maurer-Cartan holds", doc)


def cmd_obj_classify(args: argparse.Namespace, settings: Settings) -> CommandResult:
    K = linalg.field(args.field)
    t = _complex(args.file, _category_arg(args), K)
    d = strings.twcx_to_decomposition(t)
    return _emit(args, str(d), strings.decomposition_to_dict(d))


# -- nets ------------------------------------------------------------------------


def _net_and_rep(args: argparse.Namespace) -> tuple[nets.Net, nets.NetRep]:
    x = nets.net_from_dict(_load_json(args.net))
    v = nets.rep_from_dict(_load_json(args.rep), x, linalg.field(args.field))
    return x, v


def cmd_net_reduce(args: argparse.Namespace, settings: Settings) -> CommandResult:
    x, v = _net_and_rep(args)
    y, f, w = nets.reduce(x, v)
    doc = {"net": nets.net_to_dict(y), "rep": nets.rep_to_dict(w), "f1": f.f1, "f2": f.f2}
    same = nets.is_isomorphic_rep(nets.pushforward(f, w), v, rng=np.random.default_rng(args.seed))
    doc["round_trip"] = same
    if not same:
        return _emit(args, f"{FAIL} f_* V' is not isomorphic to V", doc, 1)
    text = f"{OK} reduced to {len(y.blocks)} blocks of height 1, f_* V' ≅ V"
    return _emit(args, text, doc)


def cmd_net_classify(args: argparse.Namespace, settings: Settings) -> CommandResult:
    x, v = _net_and_rep(args)
    parts = nets.classify(x, v)
    return _emit(args, "\n".join(map(str, parts)) or "0", [str(c) for c in parts])


# -- charge lattice --------------------------------------------------------------


def cmd_k0(args: argparse.Namespace, settings: Settings) -> CommandResult:
    lat = lattice.k0(surface.from_dict(_load_json(args.file)))
    rows = [list(map(int, row)) for row in lat.relation_matrix.tolist()]
    data = {
        "generators": list(lat.generators),
        "rank": lat.rank,
        "torsion": lat.torsion(),
        "relations": rows,
    }
    lines = [f"rank {lat.rank} on {len(lat.generators)} arcs ({', '.join(lat.generators)})"]
    lines.extend(f"  {face}: {row}" for face, row in zip(lat.faces, rows))
    if lat.torsion():
        lines.append(f"torsion {lat.torsion()}")
    return _emit(args, "\n".join(lines), data)


def cmd_class(args: argparse.Namespace, settings: Settings) -> CommandResult:
    K = linalg.field(args.field)
    t = _complex(args.file, _category_arg(args), K)
    if args.surface:
        lat = lattice.k0(surface.from_dict(_load_json(args.surface)))
    else:
        lat = lattice.ChargeLattice(tuple(t.category.p.vertices), ())
    c = lattice.class_of(lat, t)
    return _emit(args, str(c.as_dict()), c.as_dict())


# -- stability -------------------------------------------------------------------


def _state(path: str) -> stab.StabilityState:
    return stab.state_from_dict(_load_json(path))


def cmd_stab_mutate(args: argparse.Namespace, settings: Settings) -> CommandResult:
    st = _state(args.file)
    new = stab.mutate_left(st, args.edge) if args.left else stab.mutate_right(st, args.edge)
    doc = stab.state_to_dict(new)
    if args.out:
        _write(args.out, json.dumps(doc, indent=2))
    side = "left" if args.left else "right"
    lines = [f"{OK} {side} mutation at {args.edge}"]
    for e in new.sgraph.edges:
        lines.append(f"   {e}: Z={new.sgraph.charge(e)} class={list(new.classes[e])}")
    return _emit(args, "\n".join(lines), doc)


def cmd_stab_hn(args: argparse.Namespace, settings: Settings) -> CommandResult:
    st = _state(args.file)
    w = strings.word_from_dict(_load_json(args.word))
    tower = stab.hn(st.sgraph, w)
    lines = [f"HN filtration of {w}: {len(tower)} factor(s), mass {tower.mass():.6f}"]
    lines.extend(
        f"  φ={f.phase} Z={f.charge} " + "; ".join(str(x) for x in f.words) for f in tower.factors
    )
    return _emit(args, "\n".join(lines), stab.tower_to_dict(tower))


def cmd_stab_explore(args: argparse.Namespace, settings: Settings) -> CommandResult:
    graph = stab.explore_chambers(_state(args.file), args.depth, jobs=args.jobs)
    names = stab.chamber_names(graph)
    if args.dot:
        _write(args.dot, stab.chamber_dot(graph))
    data = {
        "chambers": [
            {
                "name": name,
                "depth": graph.nodes[k]["depth"],
                "state": stab.state_to_dict(graph.nodes[k]["state"]),
            }
            for k, name in names.items()
        ],
        "walls": [
            {"from": names[u], "to": names[v], "label": d["label"]}
            for u, v, d in graph.edges(data=True)
        ],
    }
    text = (
        f"{OK} {graph.number_of_nodes()} chambers, "
        f"{graph.number_of_edges()} walls within depth {args.depth}"
    )
    return _emit(args, text, data)


def cmd_stab_stable_count(args: argparse.Namespace, settings: Settings) -> CommandResult:
    st = _state(args.file)
    n = stab.stable_count(st.sgraph, args.max_letters)
    return _emit(args, str(n), {"stable_count": n})


def cmd_stab_sweep(args: argparse.Namespace, settings: Settings) -> CommandResult:
    states, names = [], []
    for path in args.files:
        graph = stab.explore_chambers(_state(path), args.depth, jobs=args.jobs)
        for key, name in stab.chamber_names(graph).items():
            states.append(graph.nodes[key]["state"])
            names.append(f"{Path(path).stem}:{name}")
    df = stab.stable_count_sweep(states, names)
    if args.csv:
        df.to_csv(args.csv, index=False)
    counts = sorted(set(df["stable_count"]))
    text = df.to_string(index=False) + f"\n{OK} stable counts seen: {counts}"
    return _emit(args, text, df.to_dict(orient="records"))


def cmd_stab_dot(args: argparse.Namespace, settings: Settings) -> CommandResult:
    text = stab.sgraph_dot(_state(args.file).sgraph)
    if args.out:
        _write(args.out, text)
    return _emit(args, text, {"dot": text})


def cmd_stab_axioms(args: argparse.Namespace, settings: Settings) -> CommandResult:
    report = stab.verify_axioms(_state(args.file), args.max_letters)
    data = {
        "ok": report.ok,
        "hn": report.hn_ok,
        "hom_vanishing": report.hom_vanishing_ok,
        "support": str(report.support),
        "checked": report.checked,
        "issues": [str(i) for i in report.issues],
    }
    lines = [
        f"{OK if report.hn_ok else FAIL} HN filtrations on {report.checked} heart objects",
        f"{OK if report.hom_vanishing_ok else FAIL} Hom⁰ vanishes from higher to lower phase",
        f"{OK} support bound ‖cl‖²/|Z|² ≤ {report.support}",
    ]
    lines.extend(f"  {i}" for i in report.issues)
    return _emit(args, "\n".join(lines), data, 0 if report.ok else 1)


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", choices=FIELD_NAMES, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="fukayagen", description=__doc__, parents=[common])
    groups = ap.add_subparsers(dest="group", required=True)

    def group(name: str, help: str) -> argparse._SubParsersAction:
        parser = groups.add_parser(name, help=help)
        return parser.add_subparsers(dest="command", required=True)

    def command(sub, name: str, handler: Callable, help: str) -> argparse.ArgumentParser:
        parser = sub.add_parser(name, help=help, parents=[common])
        parser.set_defaults(handler=handler)
        return parser

    s = group("surface", "graded ribbon graphs")
    command(s, "validate", cmd_surface_validate, "check a surface.v1 file").add_argument("file")
    command(s, "info", cmd_surface_info, "faces, boundary, genus").add_argument("file")

    c = group("cat", "gentle presentations and A∞ products")
    p = command(c, "build", cmd_cat_build, "surface.v1 -> gentle.v1")
    p.add_argument("file")
    p.add_argument("--out", "-o")
    p = command(c, "hom", cmd_cat_hom, "basis of Hom(X, Y)")
    p.add_argument("file")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--min", type=int, default=-5)
    p.add_argument("--max", type=int, default=5)
    p = command(c, "check-ainfty", cmd_cat_check_ainfty, "verify the A∞ relations")
    p.add_argument("file")
    p.add_argument("--max-len", type=int, default=6)
    p = command(c, "check-exact", cmd_cat_check_exact, "exactness of the diagonal resolution")
    p.add_argument("file")
    p.add_argument("--n-max", type=int, default=6)

    t = group("tw", "twisted complexes")
    p = command(t, "minimize", cmd_tw_minimize, "strip identity components")
    p.add_argument("file")
    p.add_argument("--category")
    for name, handler, help in (
        ("hom", cmd_tw_hom, "graded dimensions of Hom(a, b)"),
        ("iso", cmd_tw_iso, "isomorphism test"),
    ):
        p = command(t, name, handler, help)
        p.add_argument("a")
        p.add_argument("b")
        p.add_argument("--category")

    o = group("obj", "string and band objects")
    p = command(o, "build", cmd_obj_build, "word.v1 -> twcx.v1")
    p.add_argument("file")
    p.add_argument("--category", required=True)
    p = command(o, "classify", cmd_obj_classify, "decompose a twisted complex")
    p.add_argument("file")
    p.add_argument("--category")

    n = group("net", "nets and their representations")
    for name, handler, help in (
        ("reduce", cmd_net_reduce, "reduce to height 1"),
        ("classify", cmd_net_classify, "strings and bands"),
    ):
        p = command(n, name, handler, help)
        p.add_argument("net")
        p.add_argument("rep")

    p = groups.add_parser("k0", help="charge lattice of a surface", parents=[common])
    p.set_defaults(handler=cmd_k0)
    p.add_argument("file")
    p = groups.add_parser("class", help="class of a twisted complex", parents=[common])
    p.set_defaults(handler=cmd_class)
    p.add_argument("file")
    p.add_argument("--category")
    p.add_argument("--surface")

    st = group("stab", "S-graphs and stability conditions")
    p = command(st, "mutate", cmd_stab_mutate, "cross one wall")
    p.add_argument("file")
    p.add_argument("--edge", required=True)
    side = p.add_mutually_exclusive_group(required=True)
    side.add_argument("--left", action="store_true")
    side.add_argument("--right", action="store_true")
    p.add_argument("--out", "-o")
    p = command(st, "hn", cmd_stab_hn, "HN filtration of a heart word")
    p.add_argument("file")
    p.add_argument("word")
    p = command(st, "explore", cmd_stab_explore, "chamber graph by BFS")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--dot")
    p.add_argument("--jobs", type=int, default=1)
    p = command(st, "stable-count", cmd_stab_stable_count, "stable objects up to shift")
    p.add_argument("file")
    p.add_argument("--max-letters", type=int, default=None)
    p = command(st, "sweep", cmd_stab_sweep, "stable counts over explored chambers")
    p.add_argument("files", nargs="+")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--csv")
    p = command(st, "dot", cmd_stab_dot, "S-graph as DOT")
    p.add_argument("file")
    p.add_argument("--out", "-o")
    p = command(st, "axioms", cmd_stab_axioms, "HN, Hom vanishing and support checks")
    p.add_argument("file")
    p.add_argument("--max-letters", type=int, default=None)
    return ap


def run(argv: Sequence[str] | None = None) -> CommandResult:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return CommandResult(int(exc.code or 0), "")
    settings = load_settings()
    args.field = getattr(args, "field", settings.field)
    args.seed = getattr(args, "seed", settings.seed)
    args.json = getattr(args, "json", False)
    args.verbose = getattr(args, "verbose", False)
    for name in INPUT_ARGS:
        if getattr(args, name, None):
            setattr(args, name, _resolve(getattr(args, name), settings))
    if getattr(args, "files", None):
        args.files = [_resolve(p, settings) for p in args.files]
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.log_level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.handler(args, settings)


def main(argv: Sequence[str] | None = None) -> int:
    stamp = datetime.now().isoformat(timespec="seconds")
    t0 = time.perf_counter()
    try:
        result = run(argv)
    except FukayagenError as e:
        dt = time.perf_counter() - t0
        print(f"[{stamp}] FAIL elapsed={dt:.1f}s error={type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if result.data is not None:
        print(json.dumps(result.data, indent=2, default=str))
    elif result.text:
        print(result.text)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
