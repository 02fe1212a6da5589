"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 usage or parse error,
3 a numerical check failed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import optimize as opt
from .auxdist import (AuxPair, AuxTriple, CommonInfoAux, TimeShareLaw, load_aux,
                      split_construction, split_relations)
from .channel import (ChannelParseError, ChannelValidationError, bssc, load_channel, noiseless,
                      save_channel, validate)
from .probcore import JointDist
from .regions import (CVDM, KM, NE, cvdm_rts_constraints, km_oy_constraints, km_oz_constraints,
                      ne_outer_constraints, ne_outer_constraints_3d, ne_outer_constraints_aux_form)
from .reproduce import ALPHA, bssc_table, format_table

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_CHECK = 0, 1, 2, 3
SPLIT_TOL = 1e-9


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _r(x: float) -> str:
    return f"{x:.6f}"


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8") as f:
        f.write(text)
    os.replace(tmp, path)


def _load_channel(path, check: bool = True):
    try:
        return load_channel(path, check=check)
    except OSError as e:
        raise CommandError(EXIT_USAGE, f"cannot read {path}: {e.strerror}") from None
    except ChannelParseError as e:
        raise CommandError(EXIT_USAGE, f"{path}: {e}") from None
    except ChannelValidationError as e:
        raise CommandError(EXIT_INVALID, f"{path}: invalid channel: {e}") from None


def _load_aux(path):
    try:
        return load_aux(path)
    except OSError as e:
        raise CommandError(EXIT_USAGE, f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise CommandError(EXIT_USAGE, f"{path}: malformed JSON: {e.msg}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise CommandError(EXIT_INVALID, f"{path}: invalid auxiliary law: {e}") from None


def _config(args) -> opt.OptimizerConfig:
    try:
        return opt.OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, conv_tol=args.conv_tol,
                                   seed=args.seed, u_card=args.u_card, v_card=args.v_card, mode=args.mode,
                                   cvdm_step=args.cvdm_step)
    except ValueError as e:
        raise CommandError(EXIT_USAGE, str(e)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    c = _load_channel(args.channel, check=False)
    problems = validate(c)
    print(f"alphabets: |X|={c.nx} |Y|={c.ny} |Z|={c.nz}")
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_INVALID
    for name, rows in (("p(y|x)", c.wy), ("p(z|x)", c.wz)):
        for x, row in enumerate(rows):
            print(f"{name} x={x}: " + " ".join(_r(v) for v in row))
    print("valid")
    return EXIT_OK


def cmd_channel(args) -> int:
    if args.kind == "bssc":
        if not 0.0 <= args.p <= 1.0:
            raise CommandError(EXIT_USAGE, f"--p {args.p} outside [0, 1]")
        c = bssc(args.p)
    else:
        if args.n < 1:
            raise CommandError(EXIT_USAGE, "--n must be positive")
        c = noiseless(args.n)
    save_channel(c, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_trace(args) -> int:
    c = _load_channel(args.channel)
    cfg = _config(args)
    if args.angles < 2:
        raise CommandError(EXIT_USAGE, "--angles must be at least 2")
    tr = opt.trace_region(c, args.bound, args.angles, cfg)
    if args.out:
        csv = "r1,r2\n" + "".join(f"{a:.12g},{b:.12g}\n" for a, b in tr.polygon.vertices)
        _atomic_write(args.out, csv)
        sidecar = args.json or str(Path(args.out).with_suffix(".json"))
        _atomic_write(sidecar, json.dumps(tr.sidecar(), indent=1) + "\n")
    print(f"bound: {args.bound}")
    print(f"vertices: {len(tr.polygon.vertices)}")
    print(f"sum-rate: {_r(tr.polygon.sum_rate)}")
    return EXIT_OK


def _print_set(label: str, s) -> None:
    names = ("r1_max", "r2_max", "sum_max_a", "sum_max_b")
    print(f"[{label}]")
    for name, v in zip(names, s.as_tuple()):
        tag = "" if name in s.structural else "  (padding)"
        print(f"  {name:<10} {_r(v)}{tag}")


def cmd_eval(args) -> int:
    c = _load_channel(args.channel)
    a = _load_aux(args.aux)
    nx = getattr(a, "nx", None)
    if nx is not None and nx != c.nx:
        raise CommandError(EXIT_INVALID, f"auxiliary law has |X|={nx}, channel has |X|={c.nx}")
    try:
        if args.bound == NE:
            if args.form == "3d":
                if not isinstance(a, CommonInfoAux):
                    raise CommandError(EXIT_INVALID, "--form 3d needs a p(u)p(v)p(w|u,v)p(x|u,v,w) file")
                s = ne_outer_constraints_3d(a, c)
                print("[ne-3d: three-message bound]")
                for name, v in zip(("r0_max", "r01_max", "r02_max", "sum_max_a", "sum_max_b"), s.as_tuple()):
                    print(f"  {name:<10} {_r(v)}")
                return EXIT_OK
            if not isinstance(a, AuxTriple):
                raise CommandError(EXIT_INVALID, "NE evaluation needs a p(u,v)p(x|u,v) file")
            if args.form == "lemma":
                _print_set("ne: I(U;Y), I(V;Z), I(U;Y)+I(X;Z|U), I(V;Z)+I(X;Y|V)", ne_outer_constraints(a, c))
            else:
                _print_set("ne-aux: I(U;Y), I(V;Z), I(U;Y)+I(V;Z|U), I(V;Z)+I(U;Y|V)",
                           ne_outer_constraints_aux_form(a, c))
        elif args.bound == KM:
            if isinstance(a, AuxTriple):
                ay, az = a.pair_v(), a.pair_u()
            elif isinstance(a, AuxPair):
                ay = az = a
            else:
                raise CommandError(EXIT_INVALID, "KM evaluation needs a p(u)p(x|u) or p(u,v)p(x|u,v) file")
            _print_set("km-y on (V,X): I(X;Y), I(V;Z), -, I(V;Z)+I(X;Y|V)", km_oy_constraints(ay, c))
            _print_set("km-z on (U,X): I(U;Y), I(X;Z), I(U;Y)+I(X;Z|U), -", km_oz_constraints(az, c))
        else:
            if not isinstance(a, TimeShareLaw):
                raise CommandError(EXIT_INVALID, "CvdM evaluation needs a p(w)p(x|w) file")
            _print_set("cvdm", cvdm_rts_constraints(a.pw, a.px_given_w, c))
    except ValueError as e:
        raise CommandError(EXIT_INVALID, str(e)) from None
    return EXIT_OK


def cmd_compare(args) -> int:
    c = _load_channel(args.channel)
    cfg = _config(args)
    rep = opt.compare_bounds(c, cfg, args.angles, args.tol)
    for kind in (CVDM, NE, KM):
        print(f"{kind:<5} sum-rate {_r(rep.sum_rates[kind])}")
    for name, gap in rep.max_gaps.items():
        print(f"max gap {name}: {_r(gap)}")
    for name, v in rep.asymmetry.items():
        print(f"asymmetry {name}: {_r(v)}")
    if args.out_dir:
        out = Path(args.out_dir)
        for kind, tr in rep.traces.items():
            csv = "r1,r2\n" + "".join(f"{a:.12g},{b:.12g}\n" for a, b in tr.polygon.vertices)
            _atomic_write(out / f"{kind}.csv", csv)
            _atomic_write(out / f"{kind}.json", json.dumps(tr.sidecar(), indent=1) + "\n")
        _atomic_write(out / "report.json", json.dumps(rep.to_dict(), indent=1) + "\n")
    if rep.violations:
        for v in rep.violations:
            print(f"containment violation: {v}")
        return EXIT_CHECK
    print("containment: CvdM <= NE <= KM at every angle")
    return EXIT_OK


def cmd_bssc_repro(args) -> int:
    if not 0.0 <= args.p <= 1.0:
        raise CommandError(EXIT_USAGE, f"--p {args.p} outside [0, 1]")
    rows, c = bssc_table(args.p)
    print(f"bssc(p={args.p:g})   alpha = 0.5 - sqrt(105)/30 = {ALPHA:.6f}")
    print(format_table(rows))
    failed = [r for r in rows if r.status == "FAIL"]
    if args.out_dir:
        out = Path(args.out_dir)
        lines = ["quantity,computed,printed,tol,status"]
        for r in rows:
            printed = "" if r.printed is None else repr(r.printed)
            tol = "" if r.tol is None else repr(r.tol)
            lines.append(f"\"{r.label}\",{r.computed!r},{printed},{tol},{r.status}")
        _atomic_write(out / "bssc_table.csv", "\n".join(lines) + "\n")
        from .channel import channel_to_json

        _atomic_write(out / "bssc.json", channel_to_json(c))
    print(f"{len(failed)} of {sum(r.status in ('PASS', 'FAIL') for r in rows)} comparisons failed")
    return EXIT_CHECK if failed else EXIT_OK


def _conditional_entropies(a: AuxTriple, c) -> dict[str, float]:
    from .auxdist import induced_joint

    j: JointDist = induced_joint(a, c)
    h = lambda t, g: j.entropy(t, *g) - j.entropy(*g)
    return {
        "H(Y|U)": h("Y", "U"), "H(Z|U)": h("Z", "U"), "H(Y|V)": h("Y", "V"), "H(Z|V)": h("Z", "V"),
        "H(Y|U,V)": h("Y", "UV"), "H(Z|U,V)": h("Z", "UV"),
    }


def cmd_split_demo(args) -> int:
    c = _load_channel(args.channel)
    a = _load_aux(args.aux)
    if not isinstance(a, AuxTriple):
        raise CommandError(EXIT_INVALID, "split-demo needs a p(u,v)p(x|u,v) file")
    if a.nx != c.nx:
        raise CommandError(EXIT_INVALID, f"auxiliary law has |X|={a.nx}, channel has |X|={c.nx}")
    s = split_construction(a)
    print(f"input: |U|={a.nu} |V|={a.nv} |X|={a.nx} deterministic={a.deterministic}")
    print(f"split: |U*|={s.nu} |V*|={s.nv} deterministic={s.deterministic}")
    worst = 0.0
    for group in ("marginal", "entropy", "information"):
        print(f"[{group}]")
        for r in split_relations(a, c):
            if r.group != group:
                continue
            if r.op == "=":
                detail = f"lhs {r.lhs:.12f}  rhs {r.rhs:.12f}  |diff| {r.residual:.2e}"
            else:
                detail = f"lhs {r.lhs:.12f}  rhs {r.rhs:.12f}  slack {r.slack:.2e}"
            status = "ok" if r.holds(SPLIT_TOL) else "VIOLATED"
            print(f"  {r.name:<36} {detail}  {status}")
            worst = max(worst, r.residual)
    if args.out:
        from .auxdist import save_aux

        save_aux(s, args.out)
    print(f"max residual {worst:.2e} (tolerance {SPLIT_TOL:g})")
    return EXIT_CHECK if worst > SPLIT_TOL else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    d = opt.OptimizerConfig()
    g = p.add_argument_group("optimizer")
    g.add_argument("--restarts", type=int, default=d.restarts)
    g.add_argument("--max-iters", type=int, default=d.max_iters)
    g.add_argument("--conv-tol", type=float, default=d.conv_tol)
    g.add_argument("--seed", type=int, default=d.seed)
    g.add_argument("--u-card", type=int, default=None, help="|U| (default |X|+2)")
    g.add_argument("--v-card", type=int, default=None, help="|V| (default |X|+2)")
    g.add_argument("--mode", choices=[opt.CONTINUOUS, opt.DETERMINISTIC], default=None)
    g.add_argument("--cvdm-step", type=float, default=d.cvdm_step)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bcbounds", description="Bounds on two-receiver broadcast channel regions.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a channel file")
    p.add_argument("channel")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("channel", help="write a built-in channel to a file")
    p.add_argument("kind", choices=["bssc", "noiseless"])
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("trace", help="trace a bound as a polygon")
    p.add_argument("channel")
    p.add_argument("--bound", choices=[NE, KM, CVDM], required=True)
    p.add_argument("--angles", type=int, default=65)
    p.add_argument("--out", help="polygon CSV (a JSON sidecar is written next to it)")
    p.add_argument("--json", help="sidecar path (default: CSV path with .json)")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("eval", help="constraint values at a fixed auxiliary law")
    p.add_argument("channel")
    p.add_argument("aux")
    p.add_argument("--bound", choices=[NE, KM, CVDM], default=NE)
    p.add_argument("--form", choices=["lemma", "theorem31", "3d"], default="lemma")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="trace all three bounds and check containment")
    p.add_argument("channel")
    p.add_argument("--angles", type=int, default=65)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out-dir")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bssc-repro", help="published BSSC values against computed ones")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_bssc_repro)

    p = sub.add_parser("split-demo", help="split an auxiliary triple and check the identities")
    p.add_argument("aux")
    p.add_argument("channel")
    p.add_argument("--out", help="write the split triple here")
    p.set_defaults(func=cmd_split_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
