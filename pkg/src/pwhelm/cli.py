"""Command-line front end.

Every subcommand reads an optional JSON run spec (``--spec``), validates it
against a schema that rejects unknown keys, fills in defaults and writes its
artifacts (JSON, CSV and PNG) into ``--out``.

Exit codes: 0 success, 2 spec error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .dispersion import baseline_params, evaluate_grid
from .errors import FootprintError, NumericalError, SpecError
from .fitting import FitConfig, estimate_IG, fit_params
from .io import load_json, read_velocity_csv, write_json, write_rows_csv
from .linsys import POLICIES, PointSource, assemble, solve
from .pml import GridSpec, MediumModel, PmlConfig, coefficient_fields
from .stencils import SCHEMES, SchemeParams17, SchemeParams25
from .verify.layered import layered_demo, layered_setup, layered_velocity
from .verify.manufactured import convergence_study, run_manufactured
from .verify.seismogram import (EXAMPLE2_RECEIVERS, homogeneous_exact_trace, padded_model,
                                time_synthesis, trace_error)
from .verify.special import RickerSpec

log = logging.getLogger("pwhelm")

EXIT_OK, EXIT_SPEC, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

# ---------------------------------------------------------------- schemas

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_INT2 = {"type": "integer", "minimum": 2}
_FIT_SCHEME = {"enum": ["pw25", "pw17"]}
_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {k: _NUM for k in ("a1", "c2", "c3", "c4", "b1", "d2", "d3")},
}
_PML = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "L_pml": {"type": "number", "minimum": 0, "default": 0.0},
        "a0": {**_POS, "default": 1.79},
        "f_M": {**_POS, "default": 15.0},
        "sides": {"type": "array", "items": {"enum": ["left", "right", "top", "bottom"]},
                  "default": ["left", "right", "top", "bottom"]},
    },
}
_ESTIMATE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["vmin", "vmax", "fmin", "fmax", "h"],
    "properties": {k: _POS for k in ("vmin", "vmax", "fmin", "fmax", "h")},
}

SCHEMAS = {
    "fit": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "scheme": {**_FIT_SCHEME, "default": "pw17"},
            "IG": _PAIR,
            "estimate": _ESTIMATE,
            "gamma": {**_POS, "default": 1.0},
            "l": {**_INT2, "default": 64},
            "r": {**_INT2, "default": 64},
            "I_theta": _PAIR,
            "n_validation": {**_INT2, "default": 128},
        },
        "not": {"required": ["IG", "estimate"]},
    },
    "dispersion": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "schemes": {"type": "array", "items": _FIT_SCHEME, "minItems": 1,
                        "default": ["pw25", "pw17"]},
            "params": {"type": "object", "additionalProperties": False,
                       "properties": {"pw25": _PARAMS, "pw17": _PARAMS}},
            "baseline": {"type": "boolean", "default": False},
            "IG": {**_PAIR, "default": [4.0, 400.0]},
            "G_range": {**_PAIR, "default": [2.0, 400.0]},
            "n_G": {**_INT2, "default": 200},
            "thetas_deg": {"type": "array", "items": _NUM, "minItems": 1,
                           "default": [0.0, 22.5, 45.0, 67.5, 90.0]},
            "gammas": {"type": "array", "items": _POS, "minItems": 1,
                       "default": [0.25, 0.5, 0.75, 1.0]},
        },
    },
    "solve": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "scheme": {"enum": list(SCHEMES), "default": "pw17"},
            "problem": {"enum": ["manufactured", "model"], "default": "manufactured"},
            "N": {"type": "integer", "minimum": 6, "default": 131},
            "k0": {**_POS, "default": 75.0},
            "theta": {**_NUM, "default": float(np.pi / 4)},
            "grid": {
                "type": "object",
                "additionalProperties": False,
                "required": ["nx", "nz", "h"],
                "properties": {"nx": {"type": "integer", "minimum": 5},
                               "nz": {"type": "integer", "minimum": 5},
                               "h": _POS, "gamma": {**_POS, "default": 1.0},
                               "origin": {**_PAIR, "default": [0.0, 0.0]}},
            },
            "velocity": {"oneOf": [_POS, {"type": "string"}]},
            "frequency": _POS,
            "pml": _PML,
            "params": _PARAMS,
            "IG": _PAIR,
            "source": {"type": "object", "additionalProperties": False,
                       "required": ["x", "z"],
                       "properties": {"x": _NUM, "z": _NUM,
                                      "amplitude": {**_NUM, "default": 1.0}}},
            "boundary": {"enum": list(POLICIES)},
            "format": {"enum": ["csv", "binary", "both"], "default": "csv"},
            "output": {"type": "string", "default": "field"},
        },
    },
    "convergence": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "schemes": {"type": "array", "items": {"enum": list(SCHEMES)}, "minItems": 1,
                        "default": ["pw17", "pw25"]},
            "N_list": {"type": "array", "items": {"type": "integer", "minimum": 6},
                       "minItems": 1, "default": [131, 261, 521]},
            "k0": {**_POS, "default": 75.0},
            "theta": {**_NUM, "default": float(np.pi / 4)},
            "l": {**_INT2, "default": 64},
            "r": {**_INT2, "default": 64},
        },
    },
    "seismogram": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "scheme": {"enum": list(SCHEMES), "default": "pw17"},
            "h": {**_POS, "default": 20.0},
            "size": {**_POS, "default": 1000.0},
            "v": {**_POS, "default": 2000.0},
            "L_pml": {**_POS, "default": 500.0},
            "a0": {**_POS, "default": 1.79},
            "f_M": {**_POS, "default": 15.0},
            "dt": {**_POS, "default": 0.008},
            "T": {**_POS, "default": 1.024},
            "source": {**_PAIR, "default": [700.0, 500.0]},
            "receivers": {"type": "array", "items": _PAIR, "minItems": 1,
                          "default": [list(r) for r in EXAMPLE2_RECEIVERS]},
            "rel_cut": {**_POS, "default": 1e-4},
            "params": _PARAMS,
        },
    },
    "layered": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "scheme": {"enum": list(SCHEMES), "default": "pw25"},
            "n": {"type": "integer", "minimum": 5, "default": 201},
            "h": {**_POS, "default": 10.0},
            "velocities": {"type": "array", "items": _POS, "minItems": 1,
                           "default": [2000.0, 2500.0, 3000.0]},
            "interfaces": {"type": "array", "items": _NUM, "default": [800.0, 1400.0]},
            "velocity_csv": {"type": "string"},
            "L_pml": {**_POS, "default": 500.0},
            "a0": {**_POS, "default": 1.79},
            "f_M": {**_POS, "default": 20.0},
            "frequency": {**_POS, "default": 62.5},
            "source": {**_PAIR, "default": [1000.0, 0.0]},
            "receiver": {**_PAIR, "default": [500.0, 0.0]},
            "time_run": {"type": "boolean", "default": True},
            "snapshot_time": {**_NUM, "default": 0.52},
            "dt": {**_POS, "default": 0.004},
            "T": {**_POS, "default": 1.024},
            "params": _PARAMS,
        },
    },
}


def validate_spec(command: str, spec: dict) -> dict:
    """Validate ``spec`` and return a copy with schema defaults filled in.

    Raises
    ------
    SpecError
        On any schema violation, including unknown keys.
    """
    schema = SCHEMAS[command]
    if not isinstance(spec, dict):
        raise SpecError(f"{command} spec must be a JSON object")
    try:
        jsonschema.validate(spec, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SpecError(f"invalid {command} spec at {where}: {exc.message}") from exc
    out = copy.deepcopy(spec)
    _fill_defaults(out, schema)
    return out


def _fill_defaults(obj: dict, schema: dict):
    for key, sub in schema.get("properties", {}).items():
        if key not in obj and "default" in sub:
            obj[key] = copy.deepcopy(sub["default"])
        if isinstance(obj.get(key), dict) and "properties" in sub:
            _fill_defaults(obj[key], sub)


def _params_from(scheme: str, values: dict | None):
    if values is None:
        return None
    names25, names17 = {"a1", "c2", "c3", "c4"}, {"b1", "d2", "d3"}
    keys = set(values)
    if scheme == "pw25" and keys <= names25:
        return SchemeParams25(**values)
    if scheme == "pw17" and keys <= names17:
        return SchemeParams17(**values)
    raise SpecError(f"parameters {sorted(keys)} do not belong to scheme {scheme!r}")


def _ricker(spec) -> RickerSpec:
    return RickerSpec(spec["f_M"], spec["dt"], spec["T"])


# ---------------------------------------------------------------- commands

def cmd_fit(spec: dict, out: Path, args) -> dict:
    if "IG" in spec:
        IG = tuple(spec["IG"])
    elif "estimate" in spec:
        e = spec["estimate"]
        ig = estimate_IG(e["vmin"], e["vmax"], e["fmin"], e["fmax"], e["h"])
        IG = (ig.G_min, ig.G_max)
    else:
        raise SpecError("fit spec needs either 'IG' or 'estimate'")
    config = FitConfig(IG, spec["gamma"], spec["l"], spec["r"],
                       tuple(spec["I_theta"]) if "I_theta" in spec else None,
                       spec["n_validation"])
    report = fit_params(spec["scheme"], config)
    log.info("fitted %s on I_G=[%.4g, %.4g]: %s (maxJ %.3e, baseline %.3e)",
             spec["scheme"], *IG, report.params.as_dict(), report.max_abs_J,
             report.baseline_max_abs_J)
    data = report.to_dict()
    write_json(out / "fit_report.json", data)
    return data


def cmd_dispersion(spec: dict, out: Path, args) -> dict:
    from .plotting import plot_dispersion

    G_lo, G_hi = spec["G_range"]
    if not 2.0 <= G_lo < G_hi:
        raise SpecError("G_range must satisfy 2 <= G_min < G_max")
    # ascending G, so the last row of every theta block is the longest wave
    G = 1.0 / np.linspace(1.0 / G_lo, 1.0 / G_hi, spec["n_G"])
    inv_G = 1.0 / G
    thetas = np.deg2rad(spec["thetas_deg"])
    summary = {"gammas": {}, "files": []}
    given = spec.get("params", {})
    for gamma in spec["gammas"]:
        curves = {"vph": {}, "vgr": {}}
        used = {}
        for scheme in spec["schemes"]:
            if scheme in given:
                params = _params_from(scheme, given[scheme])
            elif spec["baseline"]:
                params = baseline_params(scheme)
            else:
                params = fit_params(scheme, FitConfig(tuple(spec["IG"]), gamma)).params
            used[scheme] = params.as_dict()
            log.info("dispersion %s gamma=%g params=%s", scheme, gamma, used[scheme])
            rows = []
            for deg, th in zip(spec["thetas_deg"], thetas):
                vph, vgr, _ = evaluate_grid(scheme, params, th, G, gamma)
                rows += [{"theta": th, "G": g, "vph_ratio": a, "vgr_ratio": b}
                         for g, a, b in zip(G, vph, vgr)]
                curves["vph"][f"{scheme} θ={deg:g}"] = vph
                curves["vgr"][f"{scheme} θ={deg:g}"] = vgr
            name = f"dispersion_{scheme}_gamma{gamma:g}.csv"
            write_rows_csv(out / name, rows, ["theta", "G", "vph_ratio", "vgr_ratio"])
            summary["files"].append(name)
        for kind, cs in curves.items():
            plot_dispersion(inv_G, cs, out / f"dispersion_gamma{gamma:g}_{kind}.png",
                            ylabel=f"{kind} / v", title=f"gamma = {gamma:g}")
        summary["gammas"][f"{gamma:g}"] = used
    write_json(out / "dispersion.json", summary)
    return summary


def _model_solve(spec, args):
    if "grid" not in spec or "frequency" not in spec or "velocity" not in spec:
        raise SpecError("a 'model' solve needs 'grid', 'velocity' and 'frequency'")
    src = spec.get("source")
    if src is None:
        raise SpecError("a 'model' solve needs a 'source'")
    g = spec["grid"]
    physical = GridSpec(g["nx"], g["nz"], g["h"], g["gamma"], tuple(g["origin"]))
    vel = spec["velocity"]
    v = read_velocity_csv(vel, physical.shape) if isinstance(vel, str) else float(vel)
    pml = spec.get("pml", {"L_pml": 0.0, "a0": 1.79, "f_M": 15.0,
                           "sides": ["left", "right", "top", "bottom"]})
    setup = padded_model(physical, v, pml["L_pml"], pml["a0"], pml["f_M"], pml["sides"])
    scheme, f = spec["scheme"], spec["frequency"]
    params = _params_from(scheme, spec.get("params"))
    if params is None and scheme in ("pw25", "pw17"):
        if "IG" in spec:
            IG = tuple(spec["IG"])
        else:
            ig = estimate_IG(setup.v_min, setup.v_max, f, f, setup.grid.h)
            IG = (ig.G_min, ig.G_max)
        params = fit_params(scheme, FitConfig(IG, setup.grid.gamma)).params
    fields = coefficient_fields(setup.grid, MediumModel(setup.velocity, f), setup.pml)
    system = assemble(scheme, setup.grid, fields, params,
                      boundary=spec.get("boundary", "two-ring-dirichlet"),
                      source=PointSource(src["x"], src["z"], src["amplitude"]))
    sol = solve(system, tol=args.solver_tol, frequency=f)
    info = {"scheme": scheme, "frequency": f, "nnz": system.nnz,
            "unknowns": system.dimension}
    return sol, params, info


def cmd_solve(spec: dict, out: Path, args) -> dict:
    log.info("solver tolerance %.1e", args.solver_tol)
    scheme = spec["scheme"]
    if spec["problem"] == "manufactured":
        params = _params_from(scheme, spec.get("params"))
        run = run_manufactured(scheme, spec["N"], spec["k0"], spec["theta"], params,
                               tol=args.solver_tol,
                               boundary=spec.get("boundary", "two-ring-exact"))
        sol = run.solution
        info = {"scheme": scheme, "N": run.N, "h": run.h, "k0": spec["k0"],
                "theta": spec["theta"], "error": run.error, "I_G": list(run.I_G)}
        params = run.params
    else:
        sol, params, info = _model_solve(spec, args)
    info["params"] = params.as_dict() if params is not None else None
    info["residual"] = sol.residual
    info["solver_tol"] = args.solver_tol
    log.info("%s solve: residual %.3e (tol %.1e), params %s", scheme, sol.residual,
             args.solver_tol, info["params"])
    stem = out / spec["output"]
    sol.meta.update({"scheme": scheme})
    if spec["format"] in ("csv", "both"):
        sol.to_csv(stem)
    if spec["format"] in ("binary", "both"):
        sol.to_binary(stem.with_suffix(".c16"))
    from .plotting import plot_wavefield
    plot_wavefield(sol.values.real, sol.grid.extent, stem.with_suffix(".png"),
                   title=f"{scheme}: real part")
    write_json(out / "solve.json", info)
    return info


def cmd_convergence(spec: dict, out: Path, args) -> dict:
    from .plotting import plot_convergence

    rows = []
    for scheme in spec["schemes"]:
        rows += convergence_study(scheme, spec["N_list"], spec["k0"], spec["theta"],
                                  l=spec["l"], r=spec["r"], tol=args.solver_tol)
    cols = ["scheme", "k0", "theta", "N", "h", "error", "ratio", "residual", "params", "I_G"]
    write_rows_csv(out / "convergence.csv", rows, cols)
    write_json(out / "convergence.json", rows)
    plot_convergence(rows, out / "convergence.png")
    print(f"{'scheme':>7} {'N':>5} {'error':>12} {'ratio':>8}")
    for r in rows:
        ratio = "" if r["ratio"] is None else f"{r['ratio']:.2f}"
        print(f"{r['scheme']:>7} {r['N']:>5} {r['error']:>12.4e} {ratio:>8}")
    return {"rows": rows}


def cmd_seismogram(spec: dict, out: Path, args) -> dict:
    from .plotting import plot_traces

    n = int(round(spec["size"] / spec["h"])) + 1
    setup = padded_model(GridSpec(n, n, spec["h"]), spec["v"], spec["L_pml"], spec["a0"],
                         spec["f_M"])
    rk = _ricker(spec)
    src = tuple(spec["source"])
    receivers = [tuple(r) for r in spec["receivers"]]
    params = _params_from(spec["scheme"], spec.get("params"))
    res = time_synthesis(setup, rk, src, receivers, spec["scheme"], params,
                         args.solver_tol, args.threads, spec["rel_cut"])
    errors = []
    for i, tr in enumerate(res.traces, start=1):
        ex = homogeneous_exact_trace(src, tr.receiver, spec["v"], rk)
        err = trace_error(tr, ex)
        errors.append({"receiver": i, "x": tr.receiver[0], "z": tr.receiver[1], "error": err})
        tr.to_csv(out / f"trace_r{i}.csv")
        ex.to_csv(out / f"exact_r{i}.csv")
        plot_traces(tr.times, {"numerical": tr.values, "exact": ex.values},
                    out / f"trace_r{i}.png", title=f"receiver {i} at {tr.receiver}")
        log.info("receiver %d %s: C-norm error %.4e", i, tr.receiver, err)
    write_rows_csv(out / "seismogram_errors.csv", errors, ["receiver", "x", "z", "error"])
    summary = {"scheme": spec["scheme"], "errors": errors,
               "frequencies": res.frequencies, "residuals": res.residuals,
               "params": res.params}
    write_json(out / "seismogram.json", summary)
    return summary


def cmd_layered(spec: dict, out: Path, args) -> dict:
    from .plotting import plot_traces, plot_wavefield

    physical = GridSpec(spec["n"], spec["n"], spec["h"])
    if "velocity_csv" in spec:
        v = read_velocity_csv(spec["velocity_csv"], physical.shape)
    else:
        v = layered_velocity(physical, spec["velocities"], spec["interfaces"])
    setup = layered_setup(spec["n"], spec["h"], v, spec["L_pml"], spec["a0"], spec["f_M"])
    rk = _ricker(spec) if spec["time_run"] else None
    res = layered_demo(setup, spec["scheme"], tuple(spec["source"]), spec["frequency"], rk,
                       spec["snapshot_time"], tuple(spec["receiver"]),
                       _params_from(spec["scheme"], spec.get("params")),
                       args.solver_tol, args.threads)
    tag = f"{spec['frequency']:g}Hz"
    res.wavefield.to_csv(out / f"wavefield_{tag}")
    res.wavefield.to_binary(out / f"wavefield_{tag}.c16")
    plot_wavefield(res.wavefield.values.real, setup.grid.extent,
                   out / f"wavefield_{tag}.png", title=f"f = {spec['frequency']:g} Hz")
    summary = {"scheme": spec["scheme"], "frequency": spec["frequency"],
               "pml_decay": res.decay, "residuals": res.residuals,
               "params": res.wavefield.meta.get("params")}
    if res.snapshot is not None:
        t_ms = f"{1000 * spec['snapshot_time']:g}ms"
        np.savetxt(out / f"snapshot_{t_ms}.csv", res.snapshot, delimiter=",", fmt="%.10g")
        plot_wavefield(res.snapshot, setup.grid.extent, out / f"snapshot_{t_ms}.png",
                       title=f"t = {t_ms}")
        res.trace.to_csv(out / "trace.csv")
        plot_traces(res.trace.times, {f"{tuple(spec['receiver'])}": res.trace.values},
                    out / "trace.png")
    write_json(out / "layered.json", summary)
    return summary


COMMANDS = {
    "fit": cmd_fit,
    "dispersion": cmd_dispersion,
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "seismogram": cmd_seismogram,
    "layered": cmd_layered,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, help="JSON run spec (defaults are used if absent)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--solver-tol", type=float, default=1e-10,
                        help="relative residual required of every linear solve")
    common.add_argument("--threads", type=int, default=1,
                        help="concurrent frequency solves")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser = argparse.ArgumentParser(
        prog="pwhelm", description="Fourth-order point-weighting Helmholtz-PML solver")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fit": "least-squares fit of the scheme parameters",
        "dispersion": "phase and group velocity curves",
        "solve": "assemble and solve one Helmholtz problem",
        "convergence": "manufactured-solution convergence table",
        "seismogram": "homogeneous-medium traces against the exact solution",
        "layered": "layered-model wavefield, snapshot and trace",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.captureWarnings(True)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if not args.solver_tol > 0:
            raise SpecError("--solver-tol must be positive")
        if args.threads < 1:
            raise SpecError("--threads must be >= 1")
        spec = load_json(args.spec) if args.spec is not None else {}
        spec = validate_spec(args.command, spec)
        args.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](spec, args.out, args)
    except (SpecError, FootprintError) as exc:
        log.error("spec error: %s", exc)
        return EXIT_SPEC
    except NumericalError as exc:
        extra = ""
        if getattr(exc, "frequency", None) is not None:
            extra = f" (frequency {exc.frequency:g} Hz)"
        log.error("%s: %s%s", type(exc).__name__, exc, extra)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
