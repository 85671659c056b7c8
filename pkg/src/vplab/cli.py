"""Command-line front end.

Every subcommand accepts --config (a JSON file whose keys are option names;
options given on the command line win), --seed, --json, --workers and --guard.
Exit codes: 0 success, 1 failed self-test, 2 invalid input, 3 resource guard hit.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .errors import GuardExceeded, VplabError
from .hf import format_hset, nat, parse_hset

SCHEMA = "vplab-report/1"

PROVENANCE = {
    "eval": "bottom-up satisfaction relation and recursive evaluator on a finite structure",
    "embed": "enumeration of structure-preserving maps between finite structures",
    "rigid": "rigid binary relations (identity is the only endomorphism)",
    "vp-family": "finite slice of a structure family searched for embeddings between members",
    "twist": "membership twisted by a permutation of a finite transitive fragment",
    "fm": "permutation model truncated to finite atom fibers with bounded supports",
    "selftest": "acceptance suite",
}

_DEFAULTS = {
    "seed": 0,
    "json": False,
    "workers": 1,
    "guard": None,
    "kind": "embedding",
    "k": None,
    "n": 3,
    "mode": "construct",
    "family": "nat",
    "nmax": 5,
    "A": None,
    "F": None,
    "seeds": "",
    "perm": "",
    "formula": None,
    "formula_file": None,
    "env": None,
    "spec": None,
    "indices": None,
    "order": "",
    "N": 3,
    "s": 1,
    "comp_kappa": None,
    "comp_family": None,
    "realize": False,
    "only": None,
    "inject_fault": None,
    "files": [],
}


class ValidationError(VplabError):
    pass


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON file of option values")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--json", action="store_const", const=True, help="emit a JSON report")
    p.add_argument("--workers", type=int, help="worker threads (default 1)")
    p.add_argument("--guard", type=int, help="resource guard for the chosen experiment")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vplab", description="finite experiments on coded "
                                 "first-order structures, embeddings and permutation models")
    ap.add_argument("--version", action="version", version=f"vplab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a formula on structure files")
    _common(p)
    p.add_argument("files", nargs="*", metavar="STRUCTURE")
    p.add_argument("--formula", help="formula text")
    p.add_argument("--formula-file", dest="formula_file")
    p.add_argument("--env", help="assignment like 'v0=n:1, v1={}'")

    p = sub.add_parser("embed", help="enumerate maps between two structure files")
    _common(p)
    p.add_argument("files", nargs="*", metavar="STRUCTURE")
    p.add_argument("--kind", choices=["hom", "endo", "embedding", "isomorphism", "k-elementary"])
    p.add_argument("--k", type=int)

    p = sub.add_parser("rigid", help="construct or search a rigid relation")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=["construct", "search"])

    p = sub.add_parser("vp-family", help="search a structure family for embeddings")
    _common(p)
    p.add_argument("--family", choices=["nat", "powerset", "replacement"])
    p.add_argument("--nmax", type=int)
    p.add_argument("--A", help="set literal for the base set")
    p.add_argument("--F", help="map literal like 'n:0 -> n:5, n:1 -> n:6'")
    p.add_argument("--mode", choices=["embedding", "k-elementary", "isomorphism"])
    p.add_argument("--k", type=int)

    p = sub.add_parser("twist", help="twisted membership on a finite fragment")
    _common(p)
    p.add_argument("--seeds", help="set literals separated by ';'")
    p.add_argument("--perm", help="disjoint cycles, e.g. '({}, n:1)'")
    p.add_argument("--formula", help="∈-formula text")
    p.add_argument("--formula-file", dest="formula_file")
    p.add_argument("--env", help="assignment like 'v0={}'")

    p = sub.add_parser("fm", help="comparability in a truncated permutation model")
    _common(p)
    p.add_argument("--spec", help="spec file (indices, order, N, s)")
    p.add_argument("--indices", help="comma-separated index names")
    p.add_argument("--order", help="pairs like 'i<=j, j<=k'")
    p.add_argument("--N", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--comp-kappa", dest="comp_kappa", type=int)
    p.add_argument("--comp-family", dest="comp_family",
                   help="index sets separated by ';', e.g. 'i; j; i,j'")
    p.add_argument("--realize", action="store_const", const=True,
                   help="check down-set realization of the order")

    p = sub.add_parser("selftest", help="run the acceptance suite")
    _common(p)
    p.add_argument("--only", help="comma-separated check numbers")
    p.add_argument("--inject-fault", dest="inject_fault",
                   help="corrupt a satisfaction clause while running (negation, const-eq, exists)")
    return ap


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < command-line flags."""
    cfg = dict(_DEFAULTS)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        for key, val in data.items():
            norm = key.replace("-", "_")
            if norm not in cfg:
                raise ValidationError(f"unknown config key {key!r}")
            cfg[norm] = val
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is not None and not (key == "files" and val == []):
            cfg[key] = val
    cfg["command"] = args.command
    if cfg["workers"] is not None and cfg["workers"] < 1:
        raise ValidationError("--workers must be >= 1")
    return cfg


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


def _load_structure(path):
    from .sat import parse_structure
    return parse_structure(_read(path), name=Path(path).stem)


def _formula_text(cfg) -> str:
    if cfg["formula"] is not None and cfg["formula_file"] is not None:
        raise ValidationError("give --formula or --formula-file, not both")
    if cfg["formula_file"] is not None:
        return _read(cfg["formula_file"]).strip()
    if cfg["formula"] is None:
        raise ValidationError("a formula is required (--formula or --formula-file)")
    return cfg["formula"]


def _parse_env(text) -> dict:
    env = {}
    if not text:
        return env
    for item in _split_top(text):
        if "=" not in item:
            raise ValidationError(f"assignment entry {item!r} needs 'vN=literal'")
        var, lit = (s.strip() for s in item.split("=", 1))
        if not (var.startswith("v") and var[1:].isdigit()):
            raise ValidationError(f"bad variable {var!r}")
        env[int(var[1:])] = nat(int(lit)) if lit.isdigit() else parse_hset(lit)
    return env


def _split_top(text, sep=","):
    depth, cur, out = 0, [], []
    for ch in text:
        if ch in "{(":
            depth += 1
        elif ch in "})":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur).strip())
    return out


# -- subcommands ------------------------------------------------------------

def run_eval(cfg) -> tuple:
    from .sat import evaluate, sat_oracle
    from .syntax import format_formula, fv, parse_formula, slot_count
    if not cfg["files"]:
        raise ValidationError("eval needs at least one structure file")
    text = _formula_text(cfg)
    env = _parse_env(cfg["env"])
    rows = []
    for path in cfg["files"]:
        S, names = _load_structure(path)
        phi = parse_formula(text, names)
        missing = sorted(fv(phi) - set(env))
        if missing:
            raise ValidationError(f"free variables {missing} need values (--env)")
        if cfg["guard"] is not None and len(S.elements) ** slot_count(phi) > cfg["guard"]:
            raise GuardExceeded("assignment space", cfg["guard"],
                                f"|M|^m = {len(S.elements) ** slot_count(phi)}")
        standard = evaluate(S, phi, env)
        bottom_up, _ = sat_oracle(S, phi, env)
        rows.append({"file": str(path), "formula": format_formula(phi, {v: k for k, v in names.items()}),
                     "holds": standard, "bottom_up": bottom_up, "diverges": standard != bottom_up})
    return rows, {"structures": len(rows), "true": sum(r["holds"] for r in rows),
                  "divergent": sum(r["diverges"] for r in rows)}


def run_embed(cfg) -> tuple:
    from .morphisms import enumerate_morphisms
    if len(cfg["files"]) != 2:
        raise ValidationError("embed needs exactly two structure files: SRC DST")
    (S, _), (T, _) = (_load_structure(p) for p in cfg["files"])
    kind, k = cfg["kind"], cfg["k"]
    if kind == "k-elementary" and k is None:
        raise ValidationError("--k is required for kind k-elementary")
    if kind != "k-elementary":
        k = None
    kw = {} if cfg["guard"] is None else {"k_guard": cfg["guard"]}
    found = enumerate_morphisms(kind, S, T, k, **kw)
    rows = [m.row(Path(cfg["files"][0]).stem, Path(cfg["files"][1]).stem) for m in found]
    return rows, {"morphisms": len(rows)}


def run_rigid(cfg) -> tuple:
    from .morphisms import find_rigid, is_rigid
    if cfg["n"] < 1:
        raise ValidationError("--n must be >= 1")
    kw = {} if cfg["guard"] is None else {"guard": cfg["guard"]}
    S = find_rigid(cfg["n"], cfg["mode"], **kw)
    rel = sorted([format_hset(x), format_hset(y)] for x, y in S.rpairs)
    return {"n": cfg["n"], "mode": cfg["mode"], "relation": rel, "verified": is_rigid(S)}, \
        {"edges": len(rel)}


def _parse_map(text) -> dict:
    out = {}
    for item in _split_top(text or ""):
        if "->" not in item:
            raise ValidationError(f"map entry {item!r} needs 'x -> y'")
        a, b = (s.strip() for s in item.split("->", 1))
        out[parse_hset(a)] = parse_hset(b)
    return out


def run_vp_family(cfg) -> tuple:
    from .families import check_vp, family_nat, family_powerset, family_replacement, unflatten_depth
    fam_kind = cfg["family"]
    if fam_kind == "nat":
        fam = family_nat(cfg["nmax"])
    else:
        if cfg["A"] is None:
            raise ValidationError(f"family {fam_kind} needs --A")
        A = parse_hset(cfg["A"])
        if fam_kind == "powerset":
            kw = {} if cfg["guard"] is None else {"guard": cfg["guard"]}
            fam = family_powerset(A, **kw)
        else:
            fam = family_replacement(A, _parse_map(cfg["F"]))
    mode = cfg["mode"] if cfg["mode"] in ("embedding", "k-elementary", "isomorphism") else "embedding"
    rep = check_vp(fam, mode, cfg["k"], workers=cfg["workers"])
    out = rep.as_dict()
    out.pop("wall_time")
    if fam_kind == "replacement":
        out["unflatten_depth"] = unflatten_depth(fam)
    return out, {"members": rep.members, "pairs_checked": rep.pairs_checked,
                 "witness_pairs": len(rep.witnesses)}


def run_twist(cfg) -> tuple:
    from . import twist as tw
    kw = {} if cfg["guard"] is None else {"guard": cfg["guard"]}
    seeds = [parse_hset(s) for s in _split_top(cfg["seeds"] or "", ";")]
    cycles = tw.parse_permutation(cfg["perm"] or "")
    U = tw.fragment(seeds, cycles, **kw)
    result = {"fragment_size": len(U), "permutation": tw.format_permutation(U)}
    if cfg["formula"] is not None or cfg["formula_file"] is not None:
        phi = tw.parse_twist_formula(_formula_text(cfg))
        env = _parse_env(cfg["env"])
        missing = sorted(tw.t_vars(phi) - set(env))
        if missing:
            raise ValidationError(f"free variables {missing} need values (--env)")
        a, b = tw.eval_twisted(phi, U, env), tw.eval_translated(phi, U, env)
        result.update({"formula": tw.format_twist_formula(phi),
                       "translated": tw.format_twist_formula(tw.translate(phi, U)),
                       "twisted": a, "via_translation": b, "agree": a == b})
    w = tw.foundation_witness(U)
    result["foundation_witness"] = None if w is None else {
        "z": format_hset(w[0]),
        "evidence": [[format_hset(m), format_hset(x)] for m, x in w[1].items()]}
    result["note"] = ("finite fragment: checks the transfer machinery and Foundation failure only")
    return result, {"fragment_size": len(U), "moved": len(U.moved())}


def run_fm(cfg) -> tuple:
    from .fm import FmSpec, build_model, comp_report, parse_spec, poset_realization
    if cfg["spec"]:
        spec = parse_spec(_read(cfg["spec"]))
    else:
        if not cfg["indices"]:
            raise ValidationError("fm needs --spec or --indices")
        idx = [t.strip() for t in cfg["indices"].split(",") if t.strip()]
        pairs = []
        for item in (cfg["order"] or "").split(","):
            if item.strip():
                if "<=" not in item:
                    raise ValidationError(f"order entry {item!r} must look like 'i<=j'")
                pairs.append(tuple(t.strip() for t in item.split("<=", 1)))
        spec = FmSpec.from_pairs(idx, pairs, cfg["N"], cfg["s"])
    kw = {} if cfg["guard"] is None else {"guard": cfg["guard"]}
    model = build_model(spec, **kw)
    out = {"N": model.N, "s": model.s, "applicability": model.applicability(),
           "spec": spec.as_dict()}
    if cfg["comp_kappa"] is not None:
        out["comp"] = comp_report(model, kappa=cfg["comp_kappa"])
    if cfg["comp_family"] is not None:
        fam = [frozenset(t.strip() for t in part.split(",") if t.strip())
               for part in cfg["comp_family"].split(";")]
        out["comp"] = comp_report(model, family=fam)
    if cfg["realize"] or (cfg["comp_kappa"] is None and cfg["comp_family"] is None):
        out["realization"] = poset_realization(model)
    out["note"] = "small-instance evidence only; (N, s) stand in for infinite fibers and finite supports"
    return out, {"atoms": len(model.atoms), "generators": len(model.generators)}


def run_selftest(cfg) -> tuple:
    from . import acceptance
    from .sat import inject_fault
    import contextlib
    only = None
    if cfg["only"]:
        only = {int(t) for t in str(cfg["only"]).split(",") if t.strip()}
    ctx = inject_fault(cfg["inject_fault"]) if cfg["inject_fault"] else contextlib.nullcontext()
    with ctx:
        results = acceptance.run_all(guard=cfg["guard"], only=only)
    mutation = acceptance.mutation_check()
    rows = [r.as_dict() for r in results]
    failed = [r.number for r in results if r.passed is False]
    skipped = [r.number for r in results if r.skipped]
    counts = {"checks": len(results), "passed": sum(r.passed is True for r in results),
              "failed": failed, "skipped": skipped, "mutation_detected": mutation["detected"]}
    return {"checks": rows, "mutation": mutation, "lines": [r.line() for r in results]}, counts


RUNNERS = {
    "eval": run_eval,
    "embed": run_embed,
    "rigid": run_rigid,
    "vp-family": run_vp_family,
    "twist": run_twist,
    "fm": run_fm,
    "selftest": run_selftest,
}


def run(cfg: dict) -> dict:
    t0 = time.perf_counter()
    results, counts = RUNNERS[cfg["command"]](cfg)
    echo = {k: v for k, v in sorted(cfg.items()) if k != "command"}
    report = {
        "schema": SCHEMA,
        "tool": "vplab",
        "version": __version__,
        "kind": cfg["command"],
        "provenance": PROVENANCE[cfg["command"]],
        "config": echo,
        "results": results,
        "counts": counts,
        "wall_time": round(time.perf_counter() - t0, 4),
    }
    if cfg["command"] == "fm":
        report["truncation"] = {"N": results["N"], "s": results["s"]}
    return report


def _table(report) -> str:
    lines = [f"{report['kind']}: {report['provenance']}"]
    res = report["results"]
    if report["kind"] == "selftest":
        lines.extend(res["lines"])
        m = res["mutation"]
        lines.append(f"mutation ({m['fault']}): {m['disagreements']}/{m['cases']} disagreements, "
                     f"detected: {m['detected']}")
    elif isinstance(res, list):
        for row in res:
            lines.append("  " + "  ".join(f"{k}={v}" for k, v in row.items()))
        if not res:
            lines.append("  (none)")
    else:
        for k, v in res.items():
            lines.append(f"  {k}: {json.dumps(v, ensure_ascii=False) if not isinstance(v, str) else v}")
    lines.append("counts: " + ", ".join(f"{k}={v}" for k, v in report["counts"].items()))
    lines.append(f"wall time: {report['wall_time']}s")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        report = run(cfg)
    except GuardExceeded as exc:
        print(f"vplab: guard exceeded: {exc}", file=sys.stderr)
        return 3
    except (VplabError, ValueError, TypeError, KeyError) as exc:
        print(f"vplab: invalid input: {exc}", file=sys.stderr)
        return 2
    if cfg["json"]:
        print(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False, default=str))
    else:
        print(_table(report))
    if cfg["command"] == "selftest":
        c = report["counts"]
        return 1 if c["failed"] or not c["mutation_detected"] else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
