"""Command-line entry point: ``laminell <subcommand> --input cfg.json``.

Every subcommand reads one JSON object, validates it against a strict
JSON schema (unknown keys are rejected) and writes a JSON report with
sorted keys and 17 significant digits. Exit codes: 0 success, 2 invalid
input, 3 analysis finished with an infeasible or discrepancy verdict.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from . import coercivity, ellipticity, gutierrez, translation
from .cell_oracle import UnboundedBelowError, homogenize_numeric, solve_cell_1d
from .lamination import delta_sweep, laminate_general, laminate_isotropic_pair
from .tensors import (DegenerateLayerError, ElasticTensor, InvalidInputError, IsotropicPhase,
                      LaminateProfile, iso_tensor)

EXIT_OK, EXIT_INVALID, EXIT_VERDICT = 0, 2, 3
SUBCOMMANDS = ("ellipticity", "laminate", "cell", "translate", "percoercivity", "gutierrez", "sweep")

DEFAULT_TOLERANCES = {
    "alpha_zero_tol": ellipticity.ZERO_TOL,
    "angle_tol": gutierrez.ANGLE_TOL,
    "loss_hi": gutierrez.LOSS_HI,
    "loss_lo": gutierrez.LOSS_LO,
    "loss_tol": coercivity.LOSS_TOL,
    "psd_rtol": translation.PSD_RTOL,
    "zero_tol": gutierrez.ZERO_TOL,
}

STATUSES = ("ok", "infeasible", "discrepancy", "no_root", "unbounded")


# -- strict input schemas --------------------------------------------------------

class SchemaError(InvalidInputError):
    pass


NUM = {"type": "number"}
INT = {"type": "integer"}
BOOL = {"type": "boolean"}


def _array(items: dict, **kw) -> dict:
    return {"type": "array", "items": items, **kw}


def _matrix(n: int) -> dict:
    return _array(_array(NUM, minItems=n, maxItems=n), minItems=n, maxItems=n)


def _object(required: dict, optional: dict | None = None) -> dict:
    return {"type": "object", "properties": {**required, **(optional or {})},
            "required": sorted(required), "additionalProperties": False}


PHASE = _object({"lambda": NUM, "mu": NUM})
TENSOR = {"oneOf": [_object({"iso": PHASE}), _object({"mandel": _matrix(6)})]}
PROFILE = {"axis": {"enum": [1, 2, 3]},
           "layers": _array(_object({"tensor": TENSOR, "fraction": NUM}), minItems=1)}
FLAGS = {"oneOf": [BOOL, _array(BOOL)]}

SWEEP_PARAMS = {
    "isotropic": ("lambda", "mu"),
    "pair": ("lambda_a", "mu_a", "lambda_b", "mu_b", "theta1"),
    "gutierrez": ("lambda_a", "mu_a", "mu_b", "lambda_b", "alpha_c"),
}

INPUT_SCHEMAS = {
    "ellipticity": _object({"tensor": TENSOR}, {"starts": {"type": "integer", "minimum": 1}}),
    "laminate": _object(PROFILE, {"delta_sweep": _object({"M": _matrix(3), "deltas": _array(NUM)})}),
    "cell": _object(PROFILE, {"M": _matrix(3), "n_elems": INT, "homogenize": BOOL}),
    "translate": _object(PROFILE, {"D": _matrix(3), "search": BOOL}),
    "percoercivity": _object(
        {"phases": _array(PHASE, minItems=1)},
        {"d": NUM, "case1": FLAGS, "case2": FLAGS, "slabs": BOOL,
         "rank1": _object({"fractions": _array(NUM), "M": _matrix(3)}, {"axis": {"enum": [1, 2, 3]}})}),
    "gutierrez": _object(
        {"lambda_a": NUM, "mu_a": NUM},
        {"mu_b": NUM, "lambda_b": NUM, "alpha_c": NUM, "strategy": {"enum": ["printed", "R1", "R2"]},
         "n_elems": INT, "search": BOOL}),
    "sweep": _object({"analysis": {"enum": sorted(SWEEP_PARAMS)}, "grid": {"type": "object"}},
                     {"fixed": {"type": "object"}}),
}


def _validate(instance, schema: dict, where: str) -> None:
    err = best_match(Draft202012Validator(schema).iter_errors(instance))
    if err is not None:
        path = "".join(f"[{p!r}]" for p in err.absolute_path)
        raise SchemaError(f"{where}{path}: {err.message}")


def _reject_constant(name: str):
    raise SchemaError(f"input: non-finite number {name} is not allowed")


def _phase(x: dict) -> IsotropicPhase:
    return IsotropicPhase(float(x["lambda"]), float(x["mu"]))


def _tensor(x: dict) -> ElasticTensor:
    if "iso" in x:
        return iso_tensor(_phase(x["iso"]))
    return ElasticTensor(np.array(x["mandel"], dtype=float))


def _profile(cfg: dict) -> LaminateProfile:
    return LaminateProfile(int(cfg["axis"]),
                           tuple((_tensor(lay["tensor"]), float(lay["fraction"])) for lay in cfg["layers"]))


def _iso_layers(cfg: dict) -> list[IsotropicPhase] | None:
    """The layer phases when every layer is given in isotropic form."""
    isos = [lay["tensor"].get("iso") for lay in cfg["layers"]]
    return [_phase(x) for x in isos] if all(isos) else None


# -- reports ----------------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return "%.17g" % obj if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(obj[k])}" for k in sorted(obj)) + "}"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, 17 significant digits, non-finite as null."""
    return _encode(_plain(obj)) + "\n"


REPORT_SCHEMA = _object({
    "subcommand": {"enum": list(SUBCOMMANDS)},
    "input_sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
    "tolerances": _object({}, {k: NUM for k in DEFAULT_TOLERANCES}),
    "status": {"enum": list(STATUSES)},
    "result": {"type": "object"},
})


def validate_report(report: dict) -> None:
    """Raise ``SchemaError`` unless ``report`` matches :data:`REPORT_SCHEMA`."""
    _validate(report, REPORT_SCHEMA, "report")


# -- subcommands --------------------------------------------------------------------

def cmd_ellipticity(raw: dict, tol: dict):
    _validate(raw, INPUT_SCHEMAS["ellipticity"], "input")
    rep = ellipticity.alpha_se_numeric(_tensor(raw["tensor"]), starts=int(raw.get("starts", ellipticity.N_STARTS)))
    out = rep.as_dict()
    a = rep.alpha_se
    out["sign"] = ("zero" if abs(a) <= tol["alpha_zero_tol"] else "positive" if a > 0 else "negative")
    if "iso" in raw["tensor"]:
        ph = _phase(raw["tensor"]["iso"])
        out["closed_form"] = {"alpha_se": ellipticity.alpha_se_isotropic(ph),
                              "alpha_vse": ellipticity.alpha_vse_isotropic(ph),
                              "alpha_vse_unit": ellipticity.alpha_vse_isotropic_unit(ph)}
    return "ok", out


def cmd_laminate(raw: dict, tol: dict):
    _validate(raw, INPUT_SCHEMAS["laminate"], "input")
    cfg = raw
    profile = _profile(cfg)
    L = laminate_general(profile)
    out = {"axis": profile.axis, "fractions": profile.fractions, "mandel": L.c}
    if "delta_sweep" in cfg:
        ds = cfg["delta_sweep"]
        deltas = [float(x) for x in ds["deltas"]]
        out["delta_sweep"] = {"deltas": deltas + [0.0],
                              "energies": delta_sweep(profile, np.array(ds["M"], dtype=float), deltas)}
    isos = _iso_layers(cfg)
    if profile.axis == 1 and isos is not None and len(isos) == 2:
        a, b = isos
        try:
            moduli, _ = laminate_isotropic_pair(a, b, profile.fractions[0])
            out["moduli"] = moduli.as_dict()
        except InvalidInputError:
            pass
    return "ok", out


def cmd_cell(raw: dict, tol: dict):
    _validate(raw, INPUT_SCHEMAS["cell"], "input")
    cfg = raw
    profile = _profile(cfg)
    n = int(cfg.get("n_elems", 64))
    out = {"n_elems": n}
    try:
        if "M" in cfg:
            sol = solve_cell_1d(profile, np.array(cfg["M"], dtype=float), n_elems=n)
            out["solution"] = sol.as_dict() | {"corrector_mean": sol.corrector_mean,
                                               "corrector_max": float(np.abs(sol.corrector).max())}
        if cfg.get("homogenize", "M" not in cfg):
            out["mandel"] = homogenize_numeric(profile, n_elems=n).c
    except UnboundedBelowError as exc:
        out["error"] = str(exc)
        return "unbounded", out
    return "ok", out


def cmd_translate(raw: dict, tol: dict):
    _validate(raw, INPUT_SCHEMAS["translate"], "input")
    cfg = raw
    profile = _profile(cfg)
    out = {}
    if "D" in cfg:
        cert = translation.certify_weak_coercivity(profile, np.array(cfg["D"], dtype=float), rtol=tol["psd_rtol"])
        out["given"] = cert.as_dict()
    else:
        cert = None
    if cfg.get("search", cert is None):
        found = translation.search_diagonal_D(profile)
        method = found.method
        found = translation.certify_weak_coercivity(profile, found.D, rtol=tol["psd_rtol"])
        found.method = method
        out["search"] = found.as_dict()
        cert = found if cert is None or found.feasible else cert
    isos = _iso_layers(cfg)
    if isos is not None:
        clamped, signed = translation.scalar_translation_interval(isos)
        out["scalar_interval"] = clamped.as_list()
        out["signed_interval"] = signed.as_list()
    feasible = bool(out.get("given", {}).get("feasible") or out.get("search", {}).get("feasible"))
    out["feasible"] = feasible
    return ("ok" if feasible else "infeasible"), out


def cmd_percoercivity(raw: dict, tol: dict):
    _validate(raw, INPUT_SCHEMAS["percoercivity"], "input")
    cfg = raw
    phases = [_phase(x) for x in cfg["phases"]]
    d = None if cfg.get("d") is None else float(cfg["d"])
    res = coercivity.lambda_per_sufficient(phases, d, cfg.get("case1", False),
                                           cfg.get("case2", False), cfg.get("slabs", False))
    out = {"sufficient_test": res.as_dict()}
    if "rank1" in cfg:
        r = cfg["rank1"]
        if len(r["fractions"]) != len(phases):
            raise SchemaError("input.rank1.fractions: one fraction per phase required")
        if d is None:
            d = translation.scalar_translation_interval(phases)[0].lo
        profile = LaminateProfile(int(r.get("axis", 1)), tuple(
            (iso_tensor(p), float(f)) for p, f in zip(phases, r["fractions"])))
        M = np.array(r["M"], dtype=float)
        out["rank1"] = coercivity.rank1_loss_certificate(profile, d, M, tol=tol["loss_tol"]).as_dict()
    return "ok", out


def cmd_gutierrez(raw: dict, tol: dict):
    _validate(raw, INPUT_SCHEMAS["gutierrez"], "input")
    cfg = {k: float(v) if k in ("lambda_a", "mu_a", "mu_b", "lambda_b", "alpha_c") else v
           for k, v in raw.items()}
    strategy = cfg.get("strategy", "printed")
    params = gutierrez.select_parameters(cfg["lambda_a"], cfg["mu_a"], cfg.get("mu_b"),
                                         cfg.get("lambda_b"), cfg.get("alpha_c"))
    out = {"strategy": strategy, "selected": params.as_dict()}
    if strategy != "printed":
        refined = gutierrez.refine(params, strategy)
        if isinstance(refined, gutierrez.NoRootReport):
            out["no_root"] = refined.as_dict()
            return "no_root", out
        params = refined
    rep = gutierrez.verify_construction(
        params, n_elems=int(cfg.get("n_elems", 64)), search=cfg.get("search", True),
        zero_tol=tol["zero_tol"], loss_window=(tol["loss_lo"], tol["loss_hi"]),
        angle_tol=tol["angle_tol"], psd_rtol=tol["psd_rtol"])
    out["report"] = rep.as_dict()
    out["verdict"] = rep.verdict.value
    return ("ok" if rep.loss else "discrepancy"), out


# -- sweep ----------------------------------------------------------------------------

def _sweep_point(analysis: str, p: dict) -> dict:
    try:
        if analysis == "isotropic":
            ph = IsotropicPhase(p["lambda"], p["mu"])
            r = ellipticity.alpha_se_numeric(iso_tensor(ph))
            return {"alpha_se": r.alpha_se, "alpha_vse": r.alpha_vse,
                    "alpha_se_closed": ellipticity.alpha_se_isotropic(ph),
                    "alpha_vse_closed": ellipticity.alpha_vse_isotropic(ph),
                    "alpha_vse_unit": ellipticity.alpha_vse_isotropic_unit(ph), "error": ""}
        if analysis == "pair":
            m, L = laminate_isotropic_pair(IsotropicPhase(p["lambda_a"], p["mu_a"]),
                                           IsotropicPhase(p["lambda_b"], p["mu_b"]), p["theta1"])
            return {**m.as_dict(), "alpha_se": ellipticity.alpha_se_numeric(L).alpha_se, "error": ""}
        g = gutierrez.select_parameters(p["lambda_a"], p["mu_a"], p.get("mu_b"), p.get("lambda_b"),
                                        p.get("alpha_c"))
        r1 = gutierrez.refine(g, "R1")
        r2 = gutierrez.refine(g, "R2")
        return {"theta1": g.theta1, "theta2": g.theta2, "B": g.moduli.B, "G1": g.G1,
                "I1_direct": g.I1_direct, "L3333_printed": g.L3333_direct,
                "mu_c_printed": g.mu_c, "mu_c_R1": r1.mu_c,
                "R2_root": r2.theta2 if isinstance(r2, gutierrez.GutierrezParameters) else math.nan,
                "error": ""}
    except (InvalidInputError, DegenerateLayerError) as exc:
        return {"error": str(exc)}


def _sweep_star(args):
    return _sweep_point(*args)


def cmd_sweep(raw: dict, tol: dict, jobs: int = 1):
    _validate(raw, INPUT_SCHEMAS["sweep"], "input")
    analysis = raw["analysis"]
    names = SWEEP_PARAMS[analysis]
    _validate(raw["grid"], _object({}, {k: _array(NUM) for k in names}), "input['grid']")
    _validate(raw.get("fixed", {}), _object({}, {k: NUM for k in names}), "input['fixed']")
    grid = {k: [float(x) for x in v] for k, v in raw["grid"].items()}
    fixed = {k: float(v) for k, v in raw.get("fixed", {}).items()}
    overlap = sorted(set(grid) & set(fixed))
    if overlap:
        raise SchemaError(f"input: {overlap} given in both grid and fixed")
    keys = sorted(grid)
    points = [dict(fixed, **dict(zip(keys, combo))) for combo in itertools.product(*(grid[k] for k in keys))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_sweep_star, [(analysis, p) for p in points]))
    else:
        outputs = [_sweep_point(analysis, p) for p in points]
    rows = [{"params": p, "outputs": o} for p, o in zip(points, outputs)]
    return "ok", {"analysis": analysis, "rows": rows}


def sweep_csv(result: dict) -> str:
    """CSV with parameter columns first, then output columns, each block sorted."""
    rows = result["rows"]
    pcols = sorted({k for r in rows for k in r["params"]})
    ocols = sorted({k for r in rows for k in r["outputs"]})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(pcols + ocols)
    for r in rows:
        cells = [r["params"].get(k, "") for k in pcols] + [r["outputs"].get(k, "") for k in ocols]
        w.writerow(["%.17g" % c if isinstance(c, float) else c for c in cells])
    return buf.getvalue()


COMMANDS = {"ellipticity": cmd_ellipticity, "laminate": cmd_laminate, "cell": cmd_cell,
            "translate": cmd_translate, "percoercivity": cmd_percoercivity,
            "gutierrez": cmd_gutierrez, "sweep": cmd_sweep}


# -- driver ----------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="laminell", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--input", required=True, help="JSON configuration file")
    ap.add_argument("--output", help="report path (default: stdout)")
    ap.add_argument("--csv", action="store_true", help="also write a CSV table (sweep only)")
    ap.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                    help=f"override a tolerance; names: {', '.join(sorted(DEFAULT_TOLERANCES))}")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for sweep")
    return ap


def _tolerances(items: list[str]) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or name not in tol:
            raise SchemaError(f"--tol: expected NAME=VALUE with NAME in {sorted(tol)}, got {item!r}")
        try:
            tol[name] = float(value)
        except ValueError:
            raise SchemaError(f"--tol {name}: {value!r} is not a number") from None
    return tol


def run(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        tol = _tolerances(args.tol)
        if args.jobs < 1:
            raise SchemaError("--jobs must be >= 1")
        if args.csv and args.subcommand != "sweep":
            raise SchemaError("--csv applies to the sweep subcommand only")
        if args.csv and not args.output:
            raise SchemaError("--csv needs --output (the table goes next to the report)")
        data = Path(args.input).read_bytes()
        raw = json.loads(data.decode("utf-8"), parse_constant=_reject_constant)
        cmd = COMMANDS[args.subcommand]
        if args.subcommand == "sweep":
            status, result = cmd(raw, tol, jobs=args.jobs)
        else:
            status, result = cmd(raw, tol)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError, InvalidInputError,
            DegenerateLayerError) as exc:
        print(f"laminell: error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    report = {"subcommand": args.subcommand, "input_sha256": hashlib.sha256(data).hexdigest(),
              "tolerances": tol, "status": status, "result": result}
    text = dumps(report)
    if args.output:
        Path(args.output).write_text(text)
        if args.csv:
            Path(args.output).with_suffix(".csv").write_text(sweep_csv(_plain(result)))
    else:
        sys.stdout.write(text)
    return EXIT_OK if status == "ok" else EXIT_VERDICT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
