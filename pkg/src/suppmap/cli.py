"""Command-line front end.

One subcommand per verification job; each prints a deterministic text
report (no timings, no environment details) and optionally writes it as
``BASE.txt`` plus ``BASE.jsonl`` via ``--out BASE``.  ``--golden FILE``
compares the text report against a stored copy.  ``--config FILE`` reads
``key = value`` defaults for any long flag, with explicit flags winning.

Exit codes: 0 when the run completed (a certified "not found" counts as
completed), 1 when an invariant was violated or a golden comparison
failed, 2 for unusable input: unknown descriptors, caps exceeded,
malformed instances, unwritable output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .autom import FinAut, GroupSizeError, GroupTable, parse_group_descriptor
from .balg import FinElem, NSet, UniverseMismatchError
from .formulas import (
    SweepCapError, minore_report, sweep_disjoint_commuting, sweep_phi_transport,
    sweep_var_laws,
)
from .katetov import (
    AlmostPerm, AlmostPermError, KatetovCapError, katetov_decompose,
    random_almost_perm, verify_parts,
)
from .reconstruct import (
    ReconstructionError, build_theta, check_chains, find_isos, injective_witness,
    inner_iso, iso_defect,
)
from .witnesses import (
    InvalidInstanceError, PreconditionError, primo_a, primo_b, primo_c, primo_d,
    secondo_sweep, terzo_sweep,
)


class UsageError(Exception):
    """Bad invocation; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2) on its own
        raise UsageError(message)


def _read_config(path: str) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    out = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _effective(args: argparse.Namespace, key: str, fallback, cast):
    """Flag value if given, else config value, else the fallback."""
    given = getattr(args, key, None)
    if given is not None:
        return given
    conf = getattr(args, "_config", {})
    if key in conf:
        try:
            return cast(conf[key])
        except ValueError:
            raise UsageError(f"config value for {key} is not valid: {conf[key]!r}") from None
    return fallback


def _group(args: argparse.Namespace, key: str = "group") -> GroupTable:
    desc = _effective(args, key, None, str)
    if desc is None:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    try:
        return parse_group_descriptor(desc)
    except (ValueError, GroupSizeError) as e:
        raise UsageError(str(e)) from None


def _emit(args: argparse.Namespace, text_lines: list[str], jsonl_lines: list[str]) -> int:
    for line in text_lines:
        print(line)
    base = _effective(args, "out", None, str)
    if base is not None:
        try:
            with open(base + ".txt", "w", encoding="utf-8") as fh:
                fh.write("\n".join(text_lines) + "\n")
            with open(base + ".jsonl", "w", encoding="utf-8") as fh:
                fh.write("\n".join(jsonl_lines) + "\n")
        except OSError as e:
            raise UsageError(f"cannot write output {base}: {e}") from None
    golden = _effective(args, "golden", None, str)
    if golden is not None:
        try:
            with open(golden, encoding="utf-8") as fh:
                expected = fh.read().splitlines()
        except OSError as e:
            raise UsageError(f"cannot read golden {golden}: {e}") from None
        if expected != text_lines:
            for i, (want, got) in enumerate(zip(expected, text_lines), 1):
                if want != got:
                    print(
                        f"golden mismatch at line {i}: expected {want!r}, got {got!r}",
                        file=sys.stderr,
                    )
                    return 1
            print(
                f"golden mismatch: {len(expected)} lines expected, {len(text_lines)} produced",
                file=sys.stderr,
            )
            return 1
    return 0


def _parse_elem(text: str) -> FinElem:
    try:
        return FinElem.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _parse_aut(text: str) -> FinAut:
    try:
        return FinAut.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


# -- subcommand bodies ---------------------------------------------------------


def _cmd_minore(args) -> int:
    G = _group(args)
    kwargs = {
        "workers": _effective(args, "workers", 1, int),
        "seed": _effective(args, "seed", 0, int),
    }
    cap = _effective(args, "cap", None, int)
    if cap is not None:
        kwargs["cap"] = cap
    rep = minore_report(G, **kwargs)
    return _emit(args, rep.text_lines(), rep.jsonl_lines())


def _cmd_secondo(args) -> int:
    G = _group(args)
    rep = secondo_sweep(
        G,
        workers=_effective(args, "workers", 1, int),
        cap=_effective(args, "cap", None, int),
        seed=_effective(args, "seed", 0, int),
    )
    return _emit(args, rep.text_lines(), rep.jsonl_lines())


def _cmd_terzo(args) -> int:
    G = _group(args)
    lo = _effective(args, "lo", -4, int)
    hi = _effective(args, "hi", 4, int)
    if lo > hi:
        raise UsageError(f"empty exponent range {lo}..{hi}")
    rep = terzo_sweep(
        G,
        max_exponents=_effective(args, "max_exponents", 3, int),
        exponent_range=(lo, hi),
    )
    lines = [f"# terzo group={rep.descriptor}"]
    jlines = []
    for fi, a, ks, hs, b in rep.violations:
        lines.append(
            f"violation f={G.elements[fi]} a={a.to_text()} exponents={list(ks)} "
            f"family={[str(G.elements[h]) for h in hs]} b={b.to_text()}"
        )
        jlines.append(json.dumps({
            "kind": "violation", "f": str(G.elements[fi]), "a": a.to_text(),
            "exponents": list(ks), "family": [str(G.elements[h]) for h in hs],
            "b": b.to_text(),
        }))
    lines.append(rep.summary_line())
    jlines.append(json.dumps({
        "kind": "summary", "group": rep.descriptor,
        "max_exponents": rep.max_exponents,
        "lo": rep.exponent_range[0], "hi": rep.exponent_range[1],
        "instances": rep.instances, "b_checked": rep.b_checked,
        "violations": len(rep.violations),
    }))
    code = _emit(args, lines, jlines)
    return code or (1 if rep.violations else 0)


def _cmd_witness(args) -> int:
    lemma = args.lemma
    try:
        if lemma == "primo_a":
            maps_text = _effective(args, "maps", None, str)
            a_text = _effective(args, "a", None, str)
            if maps_text is None or a_text is None:
                raise UsageError("primo_a needs --maps and --a")
            gs = [_parse_aut(t.strip()) for t in maps_text.split(",")]
            result = primo_a(gs, _parse_elem(a_text))
            header = f"# witness lemma=primo_a maps={maps_text.replace(' ', '')}"
        else:
            G = _group(args)
            a_text = _effective(args, "a", None, str)
            if a_text is None:
                raise UsageError(f"{lemma} needs --a")
            a = _parse_elem(a_text)
            if lemma == "primo_b":
                n = _effective(args, "n", None, int)
                if n is None:
                    raise UsageError("primo_b needs --n")
                result = primo_b(G, a, n)
            elif lemma == "primo_c":
                f_text = _effective(args, "f", None, str)
                g_text = _effective(args, "g", None, str)
                if f_text is None or g_text is None:
                    raise UsageError("primo_c needs --f and --g")
                result = primo_c(G, _parse_aut(f_text), _parse_aut(g_text), a)
            else:
                g_text = _effective(args, "g", None, str)
                if g_text is None:
                    raise UsageError("primo_d needs --g")
                result = primo_d(G, _parse_aut(g_text), a)
            header = f"# witness lemma={lemma} group={G.descriptor}"
    except (PreconditionError, UniverseMismatchError) as e:
        raise UsageError(str(e)) from None
    lines = [header, result.line()]
    jlines = [json.dumps({
        "kind": "witness", "lemma": result.lemma, "found": result.found,
        "witness": result.witness_text(), "scanned": result.scanned,
        "reason": result.reason,
    })]
    return _emit(args, lines, jlines)


def _cmd_katetov(args) -> int:
    map_text = _effective(args, "map", None, str)
    seed = _effective(args, "seed", None, int)
    if (map_text is None) == (seed is None):
        raise UsageError("katetov needs exactly one of --map or --seed")
    try:
        if map_text is not None:
            f = AlmostPerm.parse(map_text)
            header = f"# katetov map={f.to_text()}"
        else:
            f = random_almost_perm(
                seed,
                max_window=_effective(args, "max_window", 10_000, int),
                max_period=_effective(args, "max_period", 12, int),
            )
            header = f"# katetov seed={seed} map={f.to_text()}"
        parts = katetov_decompose(f, cap=_effective(args, "cap", 10_000, int))
    except (AlmostPermError, KatetovCapError) as e:
        raise UsageError(str(e)) from None
    rep = verify_parts(f, parts)
    lines = [header]
    for i, part in enumerate(parts):
        lines.append(f"part e{i}={part.to_text()}")
    lines.extend(rep.lines())
    jlines = [json.dumps({
        "kind": "parts", "map": f.to_text(),
        "e0": parts.e0.to_text(), "e1": parts.e1.to_text(), "e2": parts.e2.to_text(),
    })]
    for name, passed, wit in rep.checks:
        jlines.append(json.dumps({
            "kind": "check", "name": name, "ok": passed, "witness": wit,
        }))
    code = _emit(args, lines, jlines)
    return code or (0 if rep.ok else 1)


def _cmd_theta(args) -> int:
    conj = _effective(args, "conj", None, str)
    source = _effective(args, "source", None, str)
    failures = 0
    if conj is not None:
        G = _group(args)
        h = _parse_aut(conj)
        if h not in G:
            raise UsageError(f"{h} is not a member of {G.descriptor}")
        isos = [inner_iso(G, h)]
        header = f"# theta group={G.descriptor} conj={h.to_text().replace(' ', '_')}"
    elif source is not None:
        G = _group(args, "source")
        H = _group(args, "target")
        isos = find_isos(G, H, limit=_effective(args, "limit", 1, int))
        header = f"# theta source={G.descriptor} target={H.descriptor} isos={len(isos)}"
    else:
        raise UsageError("theta needs --conj with --group, or --source and --target")
    lines = [header]
    jlines = []
    for k, iso in enumerate(isos):
        defect = iso_defect(iso)
        if defect is not None:
            lines.append(f"iso {k} defect: {defect}")
            jlines.append(json.dumps({"kind": "defect", "iso": k, "witness": defect}))
            failures += 1
            continue
        try:
            theta = build_theta(iso)
        except ReconstructionError as e:
            lines.append(f"iso {k} ill-defined: {e}")
            jlines.append(json.dumps({"kind": "ill-defined", "iso": k, "witness": str(e)}))
            failures += 1
            continue
        for (a, b), w in zip(theta.pairs, theta.witnesses):
            lines.append(f"a={a.to_text()} theta={b.to_text()} witnesses={w}")
            jlines.append(json.dumps({
                "kind": "entry", "iso": k, "a": a.to_text(), "theta": b.to_text(),
                "witnesses": w,
            }))
        wit = injective_witness(theta)
        lines.append(f"injective={int(wit is None)}" + (
            f" witness={wit[0].to_text()}|{wit[1].to_text()}" if wit else ""
        ))
        chain = check_chains(theta)
        lines.append(chain.line())
        jlines.append(json.dumps({
            "kind": "chains", "iso": k, "chains": chain.chains,
            "comparisons": chain.comparisons, "violations": chain.violations,
            "witness": chain.witness,
        }))
        if wit is not None or not chain.ok:
            failures += 1
    code = _emit(args, lines, jlines)
    return code or (1 if failures else 0)


_SWEEPS = ("var", "commuting", "phi")


def _cmd_sweep(args) -> int:
    G = _group(args)
    which_text = _effective(args, "which", ",".join(_SWEEPS), str)
    chosen = [w.strip() for w in which_text.split(",") if w.strip()]
    for w in chosen:
        if w not in _SWEEPS:
            raise UsageError(f"unknown sweep {w!r}; pick from {', '.join(_SWEEPS)}")
    outcomes = []
    try:
        if "var" in chosen:
            outcomes.extend(sweep_var_laws(G))
        if "commuting" in chosen:
            outcomes.append(sweep_disjoint_commuting(G))
        if "phi" in chosen:
            outcomes.extend(sweep_phi_transport(G, cap=_effective(args, "cap", None, int)))
    except SweepCapError as e:
        raise UsageError(str(e)) from None
    lines = [f"# sweep group={G.descriptor} which={','.join(chosen)}"]
    lines.extend(oc.line() for oc in outcomes)
    bad = sum(0 if oc.ok else 1 for oc in outcomes)
    lines.append(f"summary sweeps={len(outcomes)} failed={bad}")
    jlines = [json.dumps({
        "kind": "sweep", "name": oc.name, "checked": oc.checked,
        "violations": oc.violations, "witness": oc.witness,
    }) for oc in outcomes]
    jlines.append(json.dumps({
        "kind": "summary", "group": G.descriptor, "sweeps": len(outcomes), "failed": bad,
    }))
    code = _emit(args, lines, jlines)
    return code or (1 if bad else 0)


# -- wiring ---------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="suppmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--config", help="key = value defaults for any long flag")
        p.add_argument("--out", help="write report to OUT.txt and OUT.jsonl")
        p.add_argument("--golden", help="compare the text report against this file")

    p = sub.add_parser("verify-minore", help="pairwise comparison vs plain support order")
    p.add_argument("--group")
    p.add_argument("--workers", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=_cmd_minore)

    p = sub.add_parser("secondo", help="disjoint-support criteria vs observed phi1")
    p.add_argument("--group")
    p.add_argument("--workers", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=_cmd_secondo)

    p = sub.add_parser("terzo", help="exhaustive orbit-covering exclusion sweep")
    p.add_argument("--group")
    p.add_argument("--max-exponents", dest="max_exponents", type=int)
    p.add_argument("--lo", type=int)
    p.add_argument("--hi", type=int)
    common(p)
    p.set_defaults(func=_cmd_terzo)

    p = sub.add_parser("witness", help="run one lemma witness search")
    p.add_argument("--lemma", required=True,
                   choices=["primo_a", "primo_b", "primo_c", "primo_d"])
    p.add_argument("--group")
    p.add_argument("--maps", help="comma-separated automorphisms (primo_a)")
    p.add_argument("--f")
    p.add_argument("--g")
    p.add_argument("--a")
    p.add_argument("--n", type=int)
    common(p)
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("katetov", help="decompose an almost-permutation and verify")
    p.add_argument("--map", help="almost-permutation in text form")
    p.add_argument("--seed", type=int, help="sample one deterministically instead")
    p.add_argument("--max-window", dest="max_window", type=int)
    p.add_argument("--max-period", dest="max_period", type=int)
    p.add_argument("--cap", type=int)
    common(p)
    p.set_defaults(func=_cmd_katetov)

    p = sub.add_parser("theta", help="derive and check the support correspondence")
    p.add_argument("--group")
    p.add_argument("--conj", help="inner isomorphism by this element")
    p.add_argument("--source")
    p.add_argument("--target")
    p.add_argument("--limit", type=int)
    common(p)
    p.set_defaults(func=_cmd_theta)

    p = sub.add_parser("sweep", help="exhaustive invariant sweeps over a group")
    p.add_argument("--group")
    p.add_argument("--which", help="comma list from: " + ", ".join(_SWEEPS))
    p.add_argument("--cap", type=int)
    common(p)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config_path = getattr(args, "config", None)
        args._config = _read_config(config_path) if config_path else {}
        for key in list(args._config):
            if not hasattr(args, key):
                raise UsageError(f"config key {key!r} is not a flag of {args.command}")
        try:
            return args.func(args)
        except (GroupSizeError, SweepCapError, KatetovCapError, AlmostPermError,
                PreconditionError, InvalidInstanceError, UniverseMismatchError) as e:
            raise UsageError(str(e)) from None
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
