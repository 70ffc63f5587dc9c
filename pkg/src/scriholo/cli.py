"""Command-line front end.

Each subcommand reads a JSON experiment config, runs one computation and
writes CSV/JSON files into the output directory.  Exit status is 0 when every
reported check passes, 1 when a check fails and 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import acceptance
from .config import SCHEMA_VERSION, Experiment, load_config
from .errors import ConfigError, ScriHoloError
from .geometry import CartesianEvent, to_compact, to_null
from .holography import upsilon
from .modular_entropy import (anec_routes, deformation_scan, entropy, modular_flow, modular_form,
                              superadditivity_check)
from .one_particle import boundary_norm2, kg_momentum_norm
from .stress_energy import entropy_from_stress

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _dump(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _transform_field(exp: Experiment):
    return upsilon(exp.source, exp.chi, exp.sphere, exp.ugrid)


def cmd_transform(exp: Experiment, out: Path, args) -> int:
    psi = _transform_field(exp)
    psi.to_csv(out / "field.csv")
    _dump(out / "field.json", psi.to_json())
    norm = boundary_norm2(psi)
    lo, hi = exp.source.support_box()
    summary = {"peak": psi.peak(), "norm": norm, "support_box": {"lo": lo.tolist(), "hi": hi.tolist()},
               "u_window": [exp.ugrid.u_min, exp.ugrid.u_max, exp.ugrid.n_u]}
    status = EXIT_OK
    if exp.source.is_gaussian and exp.chi.to_dict()["kind"] == "one":
        ref = kg_momentum_norm(exp.source, exp.sphere)
        rel = abs(norm - ref) / ref if ref else abs(norm)
        ok = rel <= exp.config["tolerances"]["norm_identity"]
        summary.update({"kg_momentum_norm": ref, "norm_identity_rel": rel,
                        "norm_identity": "pass" if ok else "fail"})
        status = EXIT_OK if ok else EXIT_FAIL
    _dump(out / "summary.json", summary)
    return status


def cmd_qnec(exp: Experiment, out: Path, args) -> int:
    d = exp.config["deformation"]
    psi = _transform_field(exp)
    direction = exp.cut_from(d["direction"])
    ts = np.linspace(d["t_min"], d["t_max"], d["steps"])
    scan = deformation_scan(psi, exp.cut, direction, ts, d["fd_step"])
    _write_text(out / "scan.csv", scan.to_csv())
    summary = scan.to_json()
    summary["monotone"] = "pass" if scan.monotone_ok else "fail"
    summary["fd_residual"] = scan.fd_residual()
    _dump(out / "scan.json", summary)
    return EXIT_OK if scan.qnec_ok and scan.monotone_ok else EXIT_FAIL


def cmd_superadd(exp: Experiment, out: Path, args) -> int:
    cuts = exp.config.get("cuts")
    if not cuts:
        raise ConfigError("$.cuts: superadd needs a pair of cuts")
    psi = _transform_field(exp)
    c1, c2 = (exp.cut_from(c) for c in cuts)
    res = superadditivity_check(psi, c1, c2)
    ok = res <= exp.config["tolerances"]["superadditivity"]
    _dump(out / "superadd.json", {"residual": res, "superadditivity": "pass" if ok else "fail",
                                  "cuts": [c1.to_dict(), c2.to_dict()]})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_anec(exp: Experiment, out: Path, args) -> int:
    psi = _transform_field(exp)
    direction = exp.cut_from(exp.config["deformation"]["direction"])
    res = anec_routes(psi, direction)
    ok = res.value >= 0.0 and res.relative_gap <= exp.config["tolerances"]["anec_routes"]
    _dump(out / "anec.json", {"anec": res.value, "u_route": res.u_route, "e_route": res.e_route,
                              "relative_gap": res.relative_gap, "anec_check": "pass" if ok else "fail"})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_flow(exp: Experiment, out: Path, args) -> int:
    psi = _transform_field(exp)
    base = modular_form(psi, exp.cut)
    rows = []
    for s in exp.config["flow"]["s"]:
        flowed = modular_flow(psi, exp.cut, s)
        # stretching can push the support past u_max; flag it rather than guess
        rows.append({"s": s, "modular_form": modular_form(flowed, exp.cut),
                     "entropy": entropy(flowed, exp.cut).total,
                     "window_ok": bool(flowed.is_edge_negligible(1e-6))})
        _dump(out / f"flow_s{s:+.6g}.json", flowed.to_json())
    _dump(out / "flow.json", {"modular_form": base, "entropy": entropy(psi, exp.cut).total, "flows": rows})
    return EXIT_OK


def cmd_stress(exp: Experiment, out: Path, args) -> int:
    st = exp.config["stress"]
    from .discretization import make_sphere_grid
    from .holography import auto_ugrid
    sg = make_sphere_grid(st["n_theta"], st["n_phi"])
    ug = auto_ugrid(exp.source, st["n_u"], st["margin"], exp.chi)
    ref = entropy(upsilon(exp.source, exp.chi, sg, ug), exp.cut)
    res = entropy_from_stress(exp.source, exp.chi, exp.cut, st["v"], sg, ug)
    ref.extras.update(res.to_json())
    rel = abs(res.value - ref.total) / ref.total if ref.total else abs(res.value)
    ref.extras["stress_tensor"]["relative_gap"] = rel
    _dump(out / "stress.json", ref.to_json())
    return EXIT_OK


def cmd_coords(exp: Experiment, out: Path, args) -> int:
    rows = []
    for t, x, y, z in exp.config["coords"]["events"]:
        e = CartesianEvent(t, (x, y, z))
        nc = to_null(e)
        cc = to_compact(nc)
        rows.append({"t": t, "x": [x, y, z], "u": nc.u, "v": nc.v, "n": list(nc.n),
                     "U": cc.U, "V": cc.V, "T": cc.T, "R": cc.R})
    _dump(out / "coords.json", {"events": rows})
    lines = ["t,x,y,z,u,v,U,V,T,R"]
    for r in rows:
        vals = [r["t"], *r["x"], r["u"], r["v"], r["U"], r["V"], r["T"], r["R"]]
        lines.append(",".join(repr(float(v)) for v in vals))
    _write_text(out / "coords.csv", "\r\n".join(lines) + "\r\n")
    return EXIT_OK


def cmd_suite(cfg: dict | None, out: Path, args) -> int:
    names = [args.criterion] if args.criterion else list(acceptance.CRITERIA)
    unknown = [n for n in names if n not in acceptance.CRITERIA]
    if unknown:
        raise ConfigError(f"unknown criterion {unknown[0]!r}; choose from {', '.join(acceptance.CRITERIA)}")
    seed = args.seed if args.seed is not None else (cfg or {}).get("seed", 0)
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(lambda n: acceptance.run_criterion(n, seed), names))
    for r in results:
        print(r.line())
    _dump(out / "suite.json", {"schema": SCHEMA_VERSION, "seed": seed,
                               "criteria": [r.to_json() for r in results],
                               "all_pass": all(r.passed for r in results)})
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


COMMANDS = {
    "transform": cmd_transform,
    "qnec": cmd_qnec,
    "superadd": cmd_superadd,
    "anec": cmd_anec,
    "flow": cmd_flow,
    "stress": cmd_stress,
    "coords": cmd_coords,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scri-holo", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted([*COMMANDS, "suite"]))
    parser.add_argument("--config", help="experiment config (JSON, schema scri-holo/1)")
    parser.add_argument("--out", default="scri-holo-out", help="output directory")
    parser.add_argument("--criterion", help="run a single acceptance criterion (suite only)")
    parser.add_argument("--seed", type=int, help="seed for randomized suites (overrides config)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for the suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = None
        if args.config:
            cfg, _ = load_config(args.config)
        elif args.command != "suite":
            raise ConfigError("--config is required for this command")
        if args.seed is not None and cfg is not None:
            cfg["seed"] = args.seed
        out.mkdir(parents=True, exist_ok=True)
        if cfg is not None:
            _dump(out / "config.resolved.json", cfg)
        if args.command == "suite":
            return cmd_suite(cfg, out, args)
        exp = Experiment.from_config(cfg)
        return COMMANDS[args.command](exp, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScriHoloError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
