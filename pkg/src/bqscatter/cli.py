"""Command-line front end: batch computation, verification, CSV emission.

Commands: ``scatter``, ``reflect``, ``expand-zero``, ``fredholm``, ``jump``,
``recover``, ``evolve``, ``verify``; global flags ``--config <path>``,
``--out <dir>``, ``--threads <n>``, ``--print-defaults``.

Exit codes follow a fixed contract: 0 success, 1 verification failure (or
an unexpected internal error), 2 configuration error, 3 numerical
assumption failure.  On any error a single machine-readable JSON object is
written to stderr.  Output files are byte-deterministic for a fixed config
and build: node counts are fixed by the config, k-sweeps preserve grid
order regardless of ``--threads``, and floats are emitted with exact
round-trip ``repr``.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from time import perf_counter

import numpy as np

from . import acceptance, evolution, fredholm, rh_data, scattering, zero_expansion
from .algebra import ray_point
from .errors import BqscatterError, ConfigError
from .potentials import InitialData, builtin, from_samples, scale

_RAY1 = cmath.exp(1j * math.pi / 6.0)

DEFAULTS: dict = {
    "potential": {"kind": "builtin", "name": "bump", "scale": 1.0},
    "k_grid": {"min": 0.1, "max": 3.0, "count": 40, "spacing": "linear"},
    "x_grid": {"min": -2.0, "max": 2.0, "count": 41},
    "tolerances": {"ode_rtol": 1e-12, "ode_atol": 1e-13},
    "evolution": {"T": 0.2, "L": 30.0, "N": 2048, "dt": 1e-4, "t_out": [],
                  "truncation": 1e-12},
    "jump": {"x": 0.0, "t": 0.0},
    "suite": "fast",
    "out": ".",
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _merge(defaults, override, path=""):
    if not isinstance(override, dict):
        raise ConfigError(f"section {path or '<root>'} must be a JSON object")
    merged = dict(defaults)
    for key, value in override.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path}{key!r}")
        if isinstance(defaults[key], dict):
            merged[key] = _merge(defaults[key], value, f"{path}{key}.")
        else:
            merged[key] = value
    return merged


def _require_number(cfg, path, positive=False):
    node = cfg
    for part in path.split("."):
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path} must be a number, got {node!r}")
    if positive and node <= 0:
        raise ConfigError(f"{path} must be positive, got {node!r}")
    return node


def _validate(cfg: dict) -> None:
    pot = cfg["potential"]
    if pot["kind"] not in ("builtin", "samples"):
        raise ConfigError(f"potential.kind must be builtin or samples, got {pot['kind']!r}")
    _require_number(cfg, "potential.scale")

    for grid, needs_span in (("k_grid", True), ("x_grid", True)):
        count = _require_number(cfg, f"{grid}.count", positive=True)
        if int(count) != count:
            raise ConfigError(f"{grid}.count must be an integer")
        lo = _require_number(cfg, f"{grid}.min")
        hi = _require_number(cfg, f"{grid}.max")
        if needs_span and count > 1 and not lo < hi:
            raise ConfigError(f"{grid}: min must be below max")
    spacing = cfg["k_grid"]["spacing"]
    if spacing not in ("linear", "log"):
        raise ConfigError(f"k_grid.spacing must be linear or log, got {spacing!r}")
    if spacing == "log" and cfg["k_grid"]["min"] <= 0:
        raise ConfigError("k_grid.spacing=log needs a positive min")

    for name in ("ode_rtol", "ode_atol"):
        _require_number(cfg, f"tolerances.{name}", positive=True)
    for name in ("T", "L", "dt", "truncation"):
        _require_number(cfg, f"evolution.{name}", positive=True)
    n = _require_number(cfg, "evolution.N", positive=True)
    if int(n) != n or n < 16:
        raise ConfigError("evolution.N must be an integer of at least 16")
    if not isinstance(cfg["evolution"]["t_out"], list):
        raise ConfigError("evolution.t_out must be a list of times")
    _require_number(cfg, "jump.x")
    _require_number(cfg, "jump.t")
    if cfg["suite"] not in ("fast", "full"):
        raise ConfigError(f"suite must be fast or full, got {cfg['suite']!r}")
    if not isinstance(cfg["out"], str):
        raise ConfigError("out must be a directory path string")


def load_config(path: str | None) -> dict:
    if path is None:
        cfg = _merge(DEFAULTS, {})
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        cfg = _merge(DEFAULTS, user)
    _validate(cfg)
    return cfg


def _load_potential(cfg: dict) -> InitialData:
    pot = cfg["potential"]
    if pot["kind"] == "builtin":
        try:
            data = builtin(pot["name"])
        except KeyError as exc:
            raise ConfigError(f"unknown builtin potential {pot['name']!r}") from exc
    else:
        path = pot.get("name", "")
        try:
            table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except OSError as exc:
            raise ConfigError(f"cannot read samples file: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"samples file must be numeric x,u,v columns: {exc}") from exc
        if table.shape[1] != 3:
            raise ConfigError("samples file needs exactly the columns x,u,v")
        data = from_samples(table[:, 0], table[:, 1], table[:, 2],
                            label=os.path.basename(str(path)))
    factor = float(pot["scale"])
    return data if factor == 1.0 else scale(data, factor)


def _k_values(cfg: dict) -> np.ndarray:
    spec = cfg["k_grid"]
    count = int(spec["count"])
    if spec["spacing"] == "log":
        return np.geomspace(spec["min"], spec["max"], count)
    return np.linspace(spec["min"], spec["max"], count)


def _x_values(cfg: dict) -> np.ndarray:
    spec = cfg["x_grid"]
    return np.linspace(spec["min"], spec["max"], int(spec["count"]))


def _positive_radii(cfg: dict, command: str) -> np.ndarray:
    ks = _k_values(cfg)
    if np.any(ks <= 0):
        raise ConfigError(f"{command} needs a strictly positive k_grid "
                          "(values are radii along the rays)")
    return ks


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _write_csv(path: str, header, rows) -> str:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _reflection_sweep(data, k_grid, threads, **kwargs):
    """scattering.reflection with the sweep parallelized over the grid."""
    ks = np.asarray(k_grid, dtype=float)
    k1 = np.sort(ks[ks > 0])
    k2 = np.sort(ks[ks < 0])
    r1 = np.array(_pmap(lambda k: scattering.reflection_pair(data, float(k), **kwargs),
                        k1, threads))
    r2 = np.array(_pmap(lambda k: scattering.reflection_pair(data, float(k), **kwargs),
                        k2, threads))
    r1_at_0, r2_at_0 = scattering.boundary_values(data, **kwargs)
    return scattering.ReflectionCoefficients(
        k1=k1, r1=r1, k2=k2, r2=r2, r1_at_0=r1_at_0, r2_at_0=r2_at_0)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_scatter(cfg, data, out_dir, threads):
    tol = cfg["tolerances"]
    ks = _k_values(cfg)

    def rows_at(k):
        sm = scattering.scattering(data, complex(k), rtol=tol["ode_rtol"],
                                   atol=tol["ode_atol"])
        rows = []
        for tag, mat, mask in (("s", sm.s, sm.s_defined), ("sA", sm.sA, sm.sA_defined)):
            for i in range(3):
                for j in range(3):
                    value = complex(mat[i, j])
                    rows.append([float(k.real) if isinstance(k, complex) else float(k),
                                 float(k.imag) if isinstance(k, complex) else 0.0,
                                 tag, f"{i + 1}{j + 1}",
                                 value.real, value.imag,
                                 "true" if mask[i, j] else "false"])
        return rows

    blocks = _pmap(rows_at, ks, threads)
    path = _write_csv(os.path.join(out_dir, "scatter.csv"),
                      ["k_re", "k_im", "entry", "ij", "re", "im", "defined"],
                      (row for block in blocks for row in block))
    print(f"wrote {path} ({18 * len(ks)} rows)")


def cmd_reflect(cfg, data, out_dir, threads):
    tol = cfg["tolerances"]
    kwargs = {"rtol": tol["ode_rtol"], "atol": tol["ode_atol"]}
    ks = _positive_radii(cfg, "reflect")
    refl = _reflection_sweep(data, np.concatenate([ks, -ks]), threads, **kwargs)

    rows = [[0.0, "r1", refl.r1_at_0.real, refl.r1_at_0.imag, abs(refl.r1_at_0)]]
    rows += [[float(k), "r1", v.real, v.imag, abs(v)]
             for k, v in zip(refl.k1, refl.r1)]
    rows += [[0.0, "r2", refl.r2_at_0.real, refl.r2_at_0.imag, abs(refl.r2_at_0)]]
    rows += [[float(k), "r2", v.real, v.imag, abs(v)]
             for k, v in zip(refl.k2[::-1], refl.r2[::-1])]
    path = _write_csv(os.path.join(out_dir, "reflect.csv"),
                      ["k", "which", "re", "im", "modulus"], rows)

    report = scattering.check_assumptions(data, n_radii=16, n_angles=12, **kwargs)
    export = rh_data.export_rh(refl, os.path.join(out_dir, "rh_data.json"),
                               checks=report)
    print(f"wrote {path} ({len(rows)} rows) and {export}")


def cmd_expand_zero(cfg, data, out_dir, threads):
    del threads  # one vectorized sweep, nothing to fan out
    xs = _x_values(cfg)
    direct = zero_expansion.extract_coeffs(data, xs)
    adjoint = zero_expansion.extract_coeffs_A(data, xs)
    rows = [
        [float(x), a1, b1, g1, d13, d23, d33, at1, bt1, gt1, dt13]
        for x, a1, b1, g1, d13, d23, d33, at1, bt1, gt1, dt13 in zip(
            xs, direct.alpha1, direct.beta1, direct.gamma1, direct.delta13,
            direct.delta23, direct.delta33, adjoint.alphaT1, adjoint.betaT1,
            adjoint.gammaT1, adjoint.deltaT13)
    ]
    path = _write_csv(
        os.path.join(out_dir, "expand_zero.csv"),
        ["x", "alpha1", "beta1", "gamma1", "delta13", "delta23", "delta33",
         "alphaT1", "betaT1", "gammaT1", "deltaT13"],
        rows)
    print(f"wrote {path} ({len(rows)} rows)")


def cmd_fredholm(cfg, data, out_dir, threads):
    radii = _positive_radii(cfg, "fredholm")
    jobs = [(j, float(r)) for j in (1, 2, 3) for r in radii]

    def det_at(job):
        j, r = job
        k = r * _RAY1
        value = fredholm.fredholm_det(data, j, k)
        return [k.real, k.imag, j, value.real, value.imag]

    rows = _pmap(det_at, jobs, threads)
    path = _write_csv(os.path.join(out_dir, "fredholm.csv"),
                      ["k_re", "k_im", "j", "re", "im"], rows)

    zeros = fredholm.zero_scan(data)
    report = {"zero_candidates": [[z.real, z.imag] for z in zeros],
              "count": len(zeros)}
    report_path = os.path.join(out_dir, "fredholm_zeros.json")
    with open(report_path, "w", encoding="ascii") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    print(f"wrote {path} ({len(rows)} rows) and {report_path}")


def cmd_jump(cfg, data, out_dir, threads):
    tol = cfg["tolerances"]
    kwargs = {"rtol": tol["ode_rtol"], "atol": tol["ode_atol"]}
    radii = _positive_radii(cfg, "jump")
    x, t = float(cfg["jump"]["x"]), float(cfg["jump"]["t"])
    refl = _reflection_sweep(data, np.concatenate([radii, -radii]), threads, **kwargs)

    rows = []
    for segment in range(1, 7):
        for r in radii:
            jm = rh_data.jump_v(refl, segment, x, t, ray_point(segment, float(r)))
            for i in range(3):
                for j in range(3):
                    value = complex(jm.value[i, j])
                    rows.append([segment, float(r), i + 1, j + 1,
                                 value.real, value.imag])
    path = _write_csv(os.path.join(out_dir, "jump.csv"),
                      ["ray", "k", "i", "j", "re", "im"], rows)
    print(f"wrote {path} ({len(rows)} rows)")


def cmd_recover(cfg, data, out_dir, threads):
    del threads  # the solver reuses one dense factorization across x
    xs = _x_values(cfg)
    model = fredholm.recover_u(data, xs)
    u_in = np.asarray(data.u0(xs), dtype=float)
    u_rec = model(xs)
    rows = [[float(x), float(a), float(b), float(abs(a - b))]
            for x, a, b in zip(xs, u_in, u_rec)]
    path = _write_csv(os.path.join(out_dir, "recover.csv"),
                      ["x", "u_in", "u_rec", "err"], rows)
    print(f"wrote {path} ({len(rows)} rows)")


def cmd_evolve(cfg, data, out_dir, threads):
    del threads  # the time loop is sequential by nature
    ev = cfg["evolution"]
    t_out = tuple(float(s) for s in ev["t_out"]) or None
    states = evolution.evolve(data, float(ev["T"]), L=float(ev["L"]),
                              N=int(ev["N"]), dt=float(ev["dt"]), t_out=t_out)
    history_path = os.path.join(out_dir, "history.csv")
    evolution.write_history(states, history_path)

    ks = _positive_radii(cfg, "evolve")
    report = evolution.reflection_evolution_check(
        data, float(ev["T"]), ks, L=float(ev["L"]), N=int(ev["N"]),
        dt=float(ev["dt"]), truncation=float(ev["truncation"]))
    payload = {
        "t": report["t"],
        "k": [float(k) for k in report["k"]],
        "r1_initial": [[v.real, v.imag] for v in report["r1_initial"]],
        "r1_evolved": [[v.real, v.imag] for v in report["r1_evolved"]],
        "modulus_max": report["modulus_max"],
        "phase_max": report["phase_max"],
        "mass_drift": report["mass_drift"],
    }
    report_path = os.path.join(out_dir, "evolution_report.json")
    with open(report_path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    print(f"wrote {history_path} ({sum(s.N for s in states)} rows) and {report_path}")


def cmd_verify(cfg, data, out_dir, threads, suite=None):
    suite = suite or cfg["suite"]
    start = perf_counter()
    ws = acceptance.Workspace(data, threads=threads)
    echo = lambda result: print(acceptance.format_line(result), flush=True)
    results = acceptance.run_fast(ws, progress=echo)
    if suite == "full":
        # the numbered criteria are defined against the builtin bump pair
        full_ws = ws if data.label == "bump" else acceptance.Workspace(threads=threads)
        results += acceptance.run_all(full_ws, progress=echo)
    passed = all(r.passed for r in results)
    payload = {
        "suite": suite,
        "potential": data.label,
        "passed": passed,
        "elapsed_s": perf_counter() - start,
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "residuals": r.residuals,
                "elapsed_s": r.elapsed_s,
                "budget_s": r.budget_s,
                "detail": r.detail,
            }
            for r in results
        ],
    }
    report_path = os.path.join(out_dir, "verify_report.json")
    with open(report_path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    print(f"{'PASS' if passed else 'FAIL'} suite={suite} "
          f"({len(results)} checks, {payload['elapsed_s']:.1f}s); "
          f"report at {report_path}")
    return 0 if passed else 1


_COMMANDS = {
    "scatter": cmd_scatter,
    "reflect": cmd_reflect,
    "expand-zero": cmd_expand_zero,
    "fredholm": cmd_fredholm,
    "jump": cmd_jump,
    "recover": cmd_recover,
    "evolve": cmd_evolve,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _emit_error(kind: str, message: str, command: str | None) -> None:
    print(json.dumps({"error": kind, "message": message, "command": command}),
          file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bqscatter",
        description="Direct-scattering toolkit: batch computation, "
                    "verification suites, CSV/JSON emission.")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON config; omitted keys take the defaults")
    parser.add_argument("--out", metavar="DIR",
                        help="output directory (default: config 'out')")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="parallel workers for k-grid sweeps (default 1)")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the full default config as JSON and exit")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in _COMMANDS:
        sub.add_parser(name)
    verify = sub.add_parser("verify")
    verify.add_argument("--suite", choices=("fast", "full"), default=None,
                        help="battery to run (default: config 'suite')")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        print(json.dumps(DEFAULTS, indent=2))
        return 0
    if args.command is None:
        _emit_error("ConfigError", "no command given (see --help)", None)
        return 2

    try:
        cfg = load_config(args.config)
        out_dir = args.out or cfg["out"]
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise ConfigError(f"output directory {out_dir!r} is not writable")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        data = _load_potential(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, data, out_dir, args.threads, suite=args.suite)
        _COMMANDS[args.command](cfg, data, out_dir, args.threads)
        return 0
    except ConfigError as exc:
        _emit_error("ConfigError", str(exc), args.command)
        return 2
    except BqscatterError as exc:
        _emit_error(type(exc).__name__, str(exc), args.command)
        return 3
    except Exception as exc:  # noqa: BLE001 - the CLI must not traceback
        _emit_error(type(exc).__name__, str(exc), args.command)
        return 1


def console() -> None:
    sys.exit(main())
