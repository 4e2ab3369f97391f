"""``eiko`` command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 solver failure,
4 verification below threshold.
"""

import argparse
import contextlib
import os
import sys

import numpy as np

from . import __version__
from .errors import EikonalError, InvalidInputError, ParseError
from .grid import Grid, parse_box
from .io import (FIELD_HEADER, LOCUS_HEADER, dumps_json, read_field_dump, read_json,
                 write_csv, write_json)

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4

PRESETS = {
    "appel-kerr": {"class_": "2", "pi": "G*B0 - B1 + 2*i*a*G", "param": ["a=1"],
                   "seed": "0,0,3:auto"},
    "static-ring": {"class_": "1", "s": "G^2/(G*B0 - B1 + 2*i*a*G)", "param": ["a=1"],
                    "seed": "2,0,0:-2i"},
}

DATA_PRESETS = {
    "static-ring": "(x + i*y)/(x^2 + y^2 + (z + i*a)^2)",
    "appel-kerr": "(x + i*y)/(z + i*a + sqrt(x^2 + y^2 + (z + i*a)^2))",
}

# defaults applied after config-file values; flags override both
DEFAULTS = {
    "solve": dict(box="-3:3:0.1", t=0.0, out="field.csv", jump_factor=0.5,
                  near_factor=10.0, max_jump=0.25),
    "verify": dict(sample=1000, random_state=0, h=1e-5, tol=1e-6, threshold=0.99,
                   box="-3:3:0.1", t=0.0, out=None),
    "locus": dict(box="-2:2:0.05", t=0.0, out="locus.csv", kind="resultant", tol=1e-9),
    "emfield": dict(box="-3:3:0.25", t=0.0, out="emfield.csv", jump_factor=0.5,
                    near_factor=10.0, max_jump=0.25),
    "charge": dict(center="0,0,0", radius=3.0, order=64, t=0.0),
    "classify": dict(t0=0.0, samples=64, random_state=0, time_derivative="evaluate",
                     sample_box="-3:3"),
    "evolve": dict(t0=0.0, time_derivative="evaluate"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _complex(text):
    t = text.strip().replace(" ", "")
    if t.endswith("i") or "i*" in t or "*i" in t:
        t = t.replace("*i", "j").replace("i*", "").replace("i", "j")
    if t in ("j", "+j", "-j"):
        t = t.replace("j", "1j")
    try:
        return complex(t)
    except ValueError:
        raise InvalidInputError(f"not a complex number: {text!r}") from None


def _params(items):
    out = {}
    for item in items or []:
        name, eq, val = item.partition("=")
        if not eq:
            raise InvalidInputError(f"parameter must look like name=value, got {item!r}")
        out[name.strip()] = _complex(val)
    return out


def _floats(text, n, what):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InvalidInputError(f"{what} must be {n} comma-separated numbers") from None
    if len(vals) != n:
        raise InvalidInputError(f"{what} must be {n} comma-separated numbers")
    return vals


def _seed(text):
    point, sep, value = text.partition(":")
    if not sep:
        raise InvalidInputError("seed must look like x,y,z:value (value a number, auto or auto:k)")
    xyz = _floats(point, 3, "seed point")
    value = value.strip()
    return xyz, value if value.startswith("auto") else _complex(value)


def _read_config(path):
    cfg = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise InvalidInputError(f"{path}:{n}: expected key=value")
        key = key.strip().replace("-", "_")
        key = "class_" if key == "class" else key
        val = val.strip()
        if key == "param":
            cfg.setdefault("param", []).append(val)
        else:
            cfg[key] = val
    return cfg


def _resolve(args, command, parser):
    """Merge preset, config file and defaults into ``args`` (flags win)."""
    known = {a.dest for a in parser._actions}
    layers = []
    if getattr(args, "config", None):
        cfg = _read_config(args.config)
        unknown = set(cfg) - known - {"preset"}
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        layers.append(cfg)
    preset = getattr(args, "preset", None) or (layers[0].get("preset") if layers else None)
    if preset:
        if preset not in PRESETS:
            raise InvalidInputError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        layers.append({k: v for k, v in PRESETS[preset].items() if k in known})
    layers.append(DEFAULTS.get(command, {}))
    for layer in layers:
        for key, val in layer.items():
            if getattr(args, key, None) in (None, []):
                action = next(a for a in parser._actions if a.dest == key) if key in known else None
                if action is not None and action.type is not None and isinstance(val, str):
                    val = action.type(val)
                setattr(args, key, val)
    return args


def _grid(args):
    lo, hi, step = parse_box(args.box)
    return Grid.cube(lo, hi, step, float(args.t))


def _estimator(cls, args):
    from .class1 import Class1Eikonal
    from .class2 import KerrCongruence
    params = _params(args.param)
    if args.seed is None:
        raise InvalidInputError("a branch seed is required (--seed x,y,z:value)")
    seed = _seed(args.seed)
    kw = dict(jump_factor=float(args.jump_factor), near_factor=float(args.near_factor),
              max_jump=float(args.max_jump))
    if str(cls) == "1":
        if not args.s:
            raise InvalidInputError("class 1 needs --s")
        return Class1Eikonal(args.s, params=params, seed=seed, **kw)
    if str(cls) == "2":
        if not args.pi:
            raise InvalidInputError("class 2 needs --pi")
        return KerrCongruence(args.pi, params=params, seed=seed, eikonal=args.s, **kw)
    raise InvalidInputError(f"--class must be 1 or 2, got {cls!r}")


def _config_record(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


SOLVE_KEYS = ("class_", "pi", "s", "param", "box", "t", "seed", "jump_factor",
              "near_factor", "max_jump")


def _field_rows(est):
    fld = est.field_
    G = fld.values
    if hasattr(est, "S_values_"):
        S = est.S_values_
    else:
        S = est.eval_builder(est.eikonal_, fld.points, G)
        S[~fld.filled] = np.nan
    G = np.where(fld.filled | np.isfinite(G), G, np.nan)
    names = fld.flag_names()
    for p, g, s, f in zip(fld.points, G, S, names):
        yield (p[0], p[1], p[2], p[3], g.real, g.imag, s.real, s.imag, f)


def _manifest_path(out):
    return out + ".manifest.json"


def cmd_solve(args):
    if args.class_ is None:
        raise InvalidInputError("--class is required")
    est = _estimator(args.class_, args)
    grid = _grid(args)
    est.fit(grid)
    write_csv(args.out, FIELD_HEADER, _field_rows(est))
    names, counts = np.unique(est.field_.flag_names(), return_counts=True)
    manifest = {
        "command": "solve",
        "config": _config_record(args, SOLVE_KEYS),
        "version": __version__,
        "output": os.path.basename(args.out),
        "points": grid.size,
        "flags": dict(zip(names.tolist(), counts.tolist())),
        "tolerances": {"jump_factor": est.jump_factor, "near_factor": est.near_factor,
                       "max_jump": est.max_jump},
    }
    write_json(_manifest_path(args.out), manifest)
    print(f"wrote {args.out} ({grid.size} points)")
    return EXIT_OK


def _verify_artifact(args):
    from .validation import check_events
    from .verify import eikonal_residuals
    pts, G, S, flags = read_field_dump(args.field)
    manifest = read_json(args.manifest or _manifest_path(args.field))
    cfg = manifest.get("config")
    if manifest.get("command") != "solve" or not isinstance(cfg, dict):
        raise InvalidInputError("manifest does not describe a solve run")
    ns = argparse.Namespace(**{k: cfg.get(k) for k in SOLVE_KEYS})
    for k, v in DEFAULTS["solve"].items():
        if getattr(ns, k, None) is None:
            setattr(ns, k, v)
    est = _estimator(ns.class_, ns)
    grid = _grid(ns)
    if grid.size != len(pts) or not np.allclose(grid.points(), pts, atol=1e-12):
        raise InvalidInputError("field dump does not match the grid in its manifest")
    est.fit(grid)
    ok = np.nonzero(flags == "ok")[0]
    if not ok.size:
        raise InvalidInputError("no regular points in the dump")
    rng = np.random.default_rng(int(args.random_state))
    pick = np.sort(rng.choice(ok, size=min(int(args.sample), ok.size), replace=False))
    anchors, G0 = pts[pick], G[pick]

    def S_eval(q):
        q = check_events(q)
        k = len(q) // len(anchors)
        a = np.repeat(anchors, k, axis=0)
        g = est.continue_from(a, np.repeat(G0, k), q)
        if hasattr(est, "S_values_"):
            return est._eval_S(q, g)[0]
        return est.eval_builder(est.eikonal_, q, g)

    res, scale = eikonal_residuals(S_eval, anchors, float(args.h))
    return anchors, res, scale


def _verify_expression(args):
    from .cauchy import InitialData
    from .verify import eikonal_residuals
    data = InitialData.from_expression(args.expr, t0=float(args.t), params=_params(args.param))
    lo, hi, _ = parse_box(args.box)
    rng = np.random.default_rng(int(args.random_state))
    pts = np.column_stack([rng.uniform(lo, hi, (int(args.sample), 3)),
                           np.full(int(args.sample), float(args.t))])
    res, scale = eikonal_residuals(data, pts, float(args.h))
    return pts, res, scale


def cmd_verify(args):
    if bool(args.field) == bool(args.expr):
        raise InvalidInputError("give exactly one of --field (artifact) or --expr")
    pts, res, scale = _verify_artifact(args) if args.field else _verify_expression(args)
    tol = float(args.tol)
    passed = np.isfinite(res) & (np.abs(res) <= tol * scale)
    det = res / 4
    if args.out:
        write_csv(args.out, ("x", "y", "z", "t", "Re_eik", "Im_eik", "Re_det", "Im_det",
                             "scale", "pass"),
                  ((p[0], p[1], p[2], p[3], r.real, r.imag, d.real, d.imag, s,
                    "pass" if ok else "fail")
                   for p, r, d, s, ok in zip(pts, res, det, scale, passed)))
    rate = float(passed.mean()) if len(passed) else 0.0
    verdict = "PASS" if rate >= float(args.threshold) else "FAIL"
    print(dumps_json({"verdict": verdict, "passed": int(passed.sum()), "total": int(len(passed)),
                      "rate": rate, "threshold": float(args.threshold), "tol": tol}), end="")
    return EXIT_OK if verdict == "PASS" else EXIT_VERIFY


def cmd_locus(args):
    from .class1 import caustic_locus, pole_locus
    from .class2 import singular_locus
    grid = _grid(args)
    params = _params(args.param)
    if args.kind == "resultant":
        if not args.pi:
            raise InvalidInputError("locus --kind resultant needs --pi")
        loc = singular_locus(args.pi, grid, params, tol=float(args.tol))
    elif args.kind in ("caustic", "pole"):
        if not args.s or args.seed is None:
            raise InvalidInputError(f"locus --kind {args.kind} needs --s and --seed")
        fn = caustic_locus if args.kind == "caustic" else pole_locus
        loc = fn(args.s, grid, _seed(args.seed), params)
    else:
        raise InvalidInputError("--kind must be resultant, caustic or pole")
    write_csv(args.out, LOCUS_HEADER, ((p[0], p[1], p[2], r) for p, r in zip(loc.points, loc.residuals)))
    write_json(_manifest_path(args.out), {
        "command": "locus", "version": __version__, "output": os.path.basename(args.out),
        "config": _config_record(args, ("kind", "pi", "s", "param", "box", "t", "seed", "tol")),
        "count": len(loc), "dimension_estimate": loc.dimension_estimate,
    })
    print(f"wrote {args.out} ({len(loc)} points)")
    return EXIT_OK


def cmd_emfield(args):
    from .fields import _check_regular, _spinor_model, to_vector
    args.class_ = "2"
    args.s = None
    est = _estimator("2", args).fit(_grid(args))
    fld = est.field_
    pts = fld.points
    F = to_vector(_spinor_model(est).spinor(pts, fld.values)).as_array()
    sing = _check_regular(est, pts, fld.values) | ~fld.filled
    F[sing] = np.nan
    names = fld.flag_names()
    names[sing & (names == "ok")] = "singular"
    header = ("x", "y", "z", "t", "Re_Fx", "Im_Fx", "Re_Fy", "Im_Fy", "Re_Fz", "Im_Fz", "flag")
    write_csv(args.out, header,
              ((p[0], p[1], p[2], p[3], f[0].real, f[0].imag, f[1].real, f[1].imag,
                f[2].real, f[2].imag, n) for p, f, n in zip(pts, F, names)))
    write_json(_manifest_path(args.out), {
        "command": "emfield", "version": __version__, "output": os.path.basename(args.out),
        "config": _config_record(args, ("pi", "param", "box", "t", "seed", "jump_factor",
                                        "near_factor", "max_jump")),
    })
    print(f"wrote {args.out} ({len(pts)} points)")
    return EXIT_OK


def cmd_charge(args):
    from .class2 import KerrCongruence
    from .fields import charge
    center = _floats(args.center, 3, "--center")
    radius = float(args.radius)
    if args.seed is None:
        args.seed = f"{center[0]},{center[1]},{center[2] + radius}:auto"
    xyz, value = _seed(args.seed)
    est = KerrCongruence(args.pi, params=_params(args.param), seed=(xyz, value))
    est.fit(np.array([[*xyz, float(args.t)]]))
    res = charge(est, center, radius, int(args.order))
    print(dumps_json({"q": res.q, "err": res.error, "radius": res.radius, "order": res.order}),
          end="")
    return EXIT_OK


def _data(args):
    from .cauchy import InitialData
    text = DATA_PRESETS.get(args.data, args.data)
    return InitialData.from_expression(text, t0=float(args.t0), params=_params(args.param),
                                       time_derivative=args.time_derivative)


def cmd_classify(args):
    from .cauchy import classify
    lo, hi = _floats(args.sample_box.replace(":", ","), 2, "--sample-box")
    res = classify(_data(args), int(args.samples), int(args.random_state), (lo, hi))
    print(dumps_json({"class": res.label, **res.diagnostics}), end="")
    return EXIT_OK


def cmd_evolve(args):
    from .cauchy import trace_ray
    if args.target is None:
        raise InvalidInputError("--target x,y,z,t is required")
    ray = trace_ray(_data(args), _floats(args.target, 4, "--target"))
    print(dumps_json({"G": ray.G, "origin": ray.origin[:3], "tau": ray.tau}), end="")
    return EXIT_OK


def _common(p, grid=True):
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--param", action="append", help="parameter binding name=value (repeatable)")
    if grid:
        p.add_argument("--box", help="lo:hi:step on all three axes")
        p.add_argument("--t", type=float, help="slice time")


def _tracking(p):
    p.add_argument("--seed", help="branch seed x,y,z:value, value a number, auto or auto:k")
    p.add_argument("--jump-factor", type=float)
    p.add_argument("--near-factor", type=float)
    p.add_argument("--max-jump", type=float)


def build_parser():
    parser = _Parser(prog="eiko", description="Complex eikonals from twistor functions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a class I or class II generating equation on a grid")
    _common(p)
    _tracking(p)
    p.add_argument("--class", dest="class_", choices=("1", "2"))
    p.add_argument("--pi", help="class II constraint Pi(G, B0, B1)")
    p.add_argument("--s", help="class I generator, or class II eikonal builder")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out", help="field dump path (CSV)")

    p = sub.add_parser("verify", help="eikonal residuals of a field dump or a closed form")
    _common(p)
    p.add_argument("--field", help="field dump written by solve")
    p.add_argument("--manifest", help="manifest of the dump (default: <field>.manifest.json)")
    p.add_argument("--expr", help="closed-form S(x, y, z, t)")
    p.add_argument("--sample", type=int)
    p.add_argument("--random-state", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--threshold", type=float)
    p.add_argument("--out", help="per-point residual CSV")

    p = sub.add_parser("locus", help="singular locus on a time slice")
    _common(p)
    p.add_argument("--kind", choices=("resultant", "caustic", "pole"))
    p.add_argument("--pi")
    p.add_argument("--s")
    p.add_argument("--seed")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")

    p = sub.add_parser("emfield", help="electromagnetic field vector on a grid")
    _common(p)
    _tracking(p)
    p.add_argument("--pi", required=False)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out")

    p = sub.add_parser("charge", help="charge from the flux through a sphere")
    _common(p, grid=False)
    p.add_argument("--pi")
    p.add_argument("--center")
    p.add_argument("--radius", type=float)
    p.add_argument("--order", type=int)
    p.add_argument("--seed", help="default: top of the sphere with the first root")
    p.add_argument("--t", type=float)

    p = sub.add_parser("cauchy", help="Cauchy-data procedures")
    csub = p.add_subparsers(dest="cauchy_command", parser_class=_Parser)
    for name, hlp in (("classify", "Class I / Class II decision"),
                      ("evolve", "transport G along a ray to a target event")):
        c = csub.add_parser(name, help=hlp)
        _common(c, grid=False)
        c.add_argument("--data", help="S(x, y, z, t) or a preset name: " + ", ".join(DATA_PRESETS))
        c.add_argument("--t0", type=float)
        c.add_argument("--time-derivative", choices=("evaluate", "static", "eikonal+", "eikonal-"))
        if name == "classify":
            c.add_argument("--samples", type=int)
            c.add_argument("--random-state", type=int)
            c.add_argument("--sample-box", help="lo:hi for the random sample cube")
        else:
            c.add_argument("--target", help="x,y,z,t")
    return parser


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "locus": cmd_locus,
            "emfield": cmd_emfield, "charge": cmd_charge,
            "classify": cmd_classify, "evolve": cmd_evolve}


def _subparser(parser, names):
    p = parser
    for name in names:
        action = next(a for a in p._actions if isinstance(a, argparse._SubParsersAction))
        p = action.choices[name]
    return p


def _limit_threads():
    n = os.environ.get("EIKO_THREADS")
    if not n:
        return contextlib.nullcontext()
    try:
        n = int(n)
    except ValueError:
        raise InvalidInputError(f"EIKO_THREADS must be an integer, got {n!r}") from None
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(n, 1))


VALUE_OPTIONS = ("--box", "--center", "--seed", "--target", "--param", "--sample-box", "--t",
                 "--t0")


def _join_dash_values(argv):
    """Attach values such as ``-3:3:0.1`` to their option so argparse accepts them."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None):
    parser = build_parser()
    argv = _join_dash_values(list(sys.argv[1:] if argv is None else argv))
    sub = parser
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a command is required")
        names = [args.command]
        if args.command == "cauchy":
            if args.cauchy_command is None:
                raise UsageError("cauchy needs a subcommand: classify or evolve")
            names.append(args.cauchy_command)
        name = names[-1]
        sub = _subparser(parser, names)
        args = _resolve(args, name, sub)
        with _limit_threads():
            return COMMANDS[name](args)
    except UsageError as exc:
        print(f"eiko: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidInputError, ParseError) as exc:
        sub.print_usage(sys.stderr)
        print(f"eiko: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EikonalError as exc:
        print(f"eiko: solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
