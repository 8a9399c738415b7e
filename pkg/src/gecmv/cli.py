"""Command-line front end.

Subcommands: spectrum, lyapunov, classify, arcs, mobility-scan,
phase-diagram, gauge-check, verify.  A JSON config file (single flat object)
can supply any flag value; explicit flags override the file.  Every run
prints a one-line JSON summary to stdout.  Exit codes: 0 success,
2 validation error, 3 numerical failure.
"""

import argparse
import cmath
import json
import math
import os
import sys

import numpy as np

from .analysis import mobility_edge_scan, write_scan_csv
from .cocycle import CocycleSpec, conjugation_defect
from .errors import NoMobilityEdge, NumericalError, ValidationError
from .lyapunov import (classify, jensen_integral, le_closed_form, le_estimate,
                       spectral_arcs)
from .model import (GOLDEN, MosaicParams, MosaicSource, PhasedSource,
                    RealifiedSource, TwinSource)
from .operators import (BoundaryCondition, IndexWindow, assemble_finite,
                        gauge_diagonal)
from .spectral import char_poly, char_poly_evenness, truncation_spectrum


def _parse_phi(text):
    if text == "golden":
        return GOLDEN
    return float(text)


def _parse_complex(text):
    return complex(text.replace(" ", ""))


def _parse_list(text, conv):
    return tuple(conv(tok) for tok in text.split(",") if tok.strip())


_COMMON = {
    "lambda1": float, "lambda2": float, "phi": _parse_phi, "theta": float,
    "s": int, "output": str, "threads": int, "seed": int,
}

_SUB_KEYS = {
    "spectrum": {"n": int, "beta1": _parse_complex, "beta2": _parse_complex},
    "lyapunov": {"t": float, "epsilon": float, "steps": int, "phases": int,
                 "family": str},
    "classify": {"t": float, "steps": int, "phases": int,
                 "tol_super": float, "tol_sub": float},
    "arcs": {},
    "mobility-scan": {"n": int, "theta_samples": lambda s: _parse_list(s, float),
                      "beta_samples": lambda s: _parse_list(s, _parse_complex),
                      "le_steps": int},
    "phase-diagram": {"lambda1_grid": lambda s: _parse_list(s, float),
                      "lambda2_grid": lambda s: _parse_list(s, float)},
    "gauge-check": {"n": int},
    "verify": {"suite": str},
}

_DEFAULTS = {
    "lambda1": 0.7, "lambda2": 0.7, "phi": GOLDEN, "theta": 0.0, "s": 2,
    "threads": None, "seed": 0, "output": None,
    "n": 256, "beta1": 1.0 + 0.0j, "beta2": 1.0 + 0.0j,
    "t": 0.0, "epsilon": 0.0, "steps": 100_000, "phases": 4,
    "family": "SzegoPP", "tol_super": None, "tol_sub": None,
    "theta_samples": (0.0,), "beta_samples": (1.0 + 0.0j,), "le_steps": 20_000,
    "lambda1_grid": (0.6, 0.7, 0.8), "lambda2_grid": (0.6, 0.7, 0.8),
    "suite": "identities",
}


def _build_parser():
    parser = argparse.ArgumentParser(prog="gecmv")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name, extra in _SUB_KEYS.items():
        sp = subs.add_parser(name)
        sp.add_argument("--config", type=str, default=None)
        for key, conv in {**_COMMON, **extra}.items():
            flag = "--" + key.replace("_", "-")
            # keep raw strings; conversion happens during layering
            sp.add_argument(flag, type=str, default=None, dest=key)
    return parser


def _load_config(sub, args):
    keys = {**_COMMON, **_SUB_KEYS[sub]}
    cfg = dict(_DEFAULTS)
    if args.config is not None:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a single flat JSON object")
        for k, v in data.items():
            if k not in keys:
                raise ValidationError(f"unknown config key: {k}")
            cfg[k] = keys[k](v) if isinstance(v, str) else _coerce(keys[k], v)
    for k, conv in keys.items():
        raw = getattr(args, k, None)
        if raw is not None:
            cfg[k] = conv(raw)
    return cfg


def _coerce(conv, value):
    if conv in (float, int, str):
        return conv(value)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return value


def _params(cfg):
    return MosaicParams(cfg["lambda1"], cfg["lambda2"], cfg["phi"],
                        cfg["theta"], cfg["s"])


def _threads(cfg):
    if cfg["threads"] is not None:
        return cfg["threads"]
    env = os.environ.get("CMV_THREADS")
    return int(env) if env else 1


def _emit(summary):
    print(json.dumps(summary, sort_keys=True))


def _open_output(cfg, default_name):
    path = cfg["output"] or default_name
    return path, open(path, "w")


def _cmd_spectrum(cfg):
    params = _params(cfg)
    source = MosaicSource(params)
    window = IndexWindow(0, cfg["n"] - 1)
    res = truncation_spectrum(source, window, cfg["beta1"], cfg["beta2"])
    path, fh = _open_output(cfg, "spectrum.csv")
    with fh:
        fh.write("angle,residual,beta1,beta2,theta\n")
        for t in res.angles:
            fh.write(f"{t:.15g},{res.residual:.6g},{_cfmt(cfg['beta1'])},"
                     f"{_cfmt(cfg['beta2'])},{params.theta:.15g}\n")
    _emit({"subcommand": "spectrum", "count": res.count,
           "residual": res.residual, "output": path})


def _cfmt(c):
    return f"{c.real:.12g}{c.imag:+.12g}j"


def _cmd_lyapunov(cfg):
    params = _params(cfg)
    z = cmath.exp(1j * cfg["t"])
    spec = CocycleSpec(cfg["family"], params, z, epsilon=cfg["epsilon"])
    est = le_estimate(spec, cfg["steps"], cfg["phases"], threads=_threads(cfg))
    summary = {"subcommand": "lyapunov", "family": cfg["family"], "t": cfg["t"],
               "epsilon": cfg["epsilon"], "value": est.value,
               "raw_rate": est.raw_cocycle_rate, "spread": est.spread,
               "closed_form": le_closed_form(params.lambda1, params.lambda2,
                                             cfg["t"])}
    _emit(summary)


def _cmd_classify(cfg):
    params = _params(cfg)
    tol = {}
    if cfg["tol_super"] is not None:
        tol["super"] = cfg["tol_super"]
    if cfg["tol_sub"] is not None:
        tol["sub"] = cfg["tol_sub"]
    res = classify(params, cfg["t"], tolerances=tol or None,
                   n_steps=cfg["steps"], n_phases=cfg["phases"],
                   threads=_threads(cfg))
    evidence = {k: v for k, v in res.evidence.items()
                if isinstance(v, (int, float, str))}
    _emit({"subcommand": "classify", "t": cfg["t"], "tag": res.tag,
           "evidence": evidence})


def _cmd_arcs(cfg):
    arcs = spectral_arcs(cfg["lambda1"], cfg["lambda2"])
    _emit({"subcommand": "arcs", "t0": arcs.t0,
           "endpoints": list(arcs.endpoints),
           "ac": [list(iv) for iv in arcs.ac_intervals],
           "pp": [list(iv) for iv in arcs.pp_intervals]})


def _cmd_mobility_scan(cfg):
    params = _params(cfg)
    rows = mobility_edge_scan(params, cfg["n"], cfg["theta_samples"],
                              cfg["beta_samples"], le_steps=cfg["le_steps"],
                              threads=_threads(cfg))
    path, fh = _open_output(cfg, "mobility_scan.csv")
    with fh:
        write_scan_csv(rows, params, cfg["n"], fh)
    regions = {}
    for r in rows:
        regions[r.region] = regions.get(r.region, 0) + 1
    _emit({"subcommand": "mobility-scan", "rows": len(rows),
           "regions": regions, "output": path})


def _cmd_phase_diagram(cfg):
    path, fh = _open_output(cfg, "phase_diagram.csv")
    rows = 0
    with fh:
        fh.write("lambda1,lambda2,t0,edge1,edge2,edge3,edge4\n")
        for l1 in cfg["lambda1_grid"]:
            for l2 in cfg["lambda2_grid"]:
                try:
                    arcs = spectral_arcs(l1, l2)
                    e = arcs.endpoints
                    fh.write(f"{l1:.12g},{l2:.12g},{arcs.t0:.12g},"
                             f"{e[0]:.12g},{e[1]:.12g},{e[2]:.12g},{e[3]:.12g}\n")
                except NoMobilityEdge:
                    fh.write(f"{l1:.12g},{l2:.12g},NoMobilityEdge,,,,\n")
                rows += 1
    _emit({"subcommand": "phase-diagram", "rows": rows, "output": path})


def _cmd_gauge_check(cfg):
    params = _params(cfg)
    rng = np.random.default_rng(cfg["seed"])
    n = cfg["n"]
    window = IndexWindow(0, n - 1)
    lo, hi = window.a - 6, window.b + 6
    phases = {m: np.exp(2j * math.pi * rng.random(hi - lo + 1))
              for m in ("xi", "zeta")}

    def mk(m):
        table = phases[m]
        return lambda k: table[k - lo] if lo <= k <= hi else 1.0 + 0.0j

    xi, zeta = mk("xi"), mk("zeta")
    base = RealifiedSource(MosaicSource(params))
    src_xi = PhasedSource(base, xi)
    src_zeta = PhasedSource(base, zeta)
    bc = BoundaryCondition.phase(1.0 + 0.0j)
    op_xi = assemble_finite(src_xi, window, bc, bc)
    op_zeta = assemble_finite(src_zeta, window, bc, bc)
    d = gauge_diagonal(xi, zeta, window)
    dm = d.matrix()
    defect = float(np.abs(dm.conj().T @ op_xi.entries @ dm - op_zeta.entries).max())
    ev_xi = np.sort(np.angle(np.linalg.eigvals(op_xi.entries)) % (2 * math.pi))
    ev_zeta = np.sort(np.angle(np.linalg.eigvals(op_zeta.entries)) % (2 * math.pi))
    spec_gap = float(np.abs(ev_xi - ev_zeta).max())
    _emit({"subcommand": "gauge-check", "n": n, "conjugation_defect": defect,
           "isospectrality_gap": spec_gap})
    if defect > 1e-9 or spec_gap > 1e-8:
        raise NumericalError("gauge check failed")


def _cmd_verify(cfg):
    params = _params(cfg)
    checks = {}
    z = cmath.exp(0.7j)
    defect = max(conjugation_defect(params, z, 0.1 + 0.05 * k, 3 + k)
                 for k in range(8))
    checks["conjugation"] = defect < 1e-12
    window = IndexWindow(0, 9)
    bc = BoundaryCondition.phase(1.0 + 0.0j)
    src = RealifiedSource(MosaicSource(params))
    cp = char_poly(src, window, bc, bc, z)
    op = assemble_finite(src, window, bc, bc)
    det = complex(np.linalg.det(z * np.eye(window.size) - op.entries))
    checks["determinant"] = abs(cp.raw_det - det) <= 1e-9 * max(abs(det), 1.0)
    tw = char_poly(TwinSource(params), window, bc, bc, z)
    checks["gauge"] = abs(cp.normalized - tw.normalized) <= 1e-9 * max(
        abs(cp.normalized), 1.0)
    grid = [0.05 * k + 0.01 for k in range(8)]
    checks["evenness"] = char_poly_evenness(params, 2, z, grid) < 1e-9
    jd = max(abs(jensen_integral(tt, 0.0)
                 - math.log((1.0 + math.sqrt(1 - tt * tt)) / 2.0))
             for tt in (0.3, 0.8))
    checks["jensen"] = jd < 1e-12
    checks = {k: bool(v) for k, v in checks.items()}
    ok = all(checks.values())
    _emit({"subcommand": "verify", "suite": cfg["suite"], "checks": checks,
           "passed": ok})
    if not ok:
        raise NumericalError("verification suite failed")


_DISPATCH = {
    "spectrum": _cmd_spectrum,
    "lyapunov": _cmd_lyapunov,
    "classify": _cmd_classify,
    "arcs": _cmd_arcs,
    "mobility-scan": _cmd_mobility_scan,
    "phase-diagram": _cmd_phase_diagram,
    "gauge-check": _cmd_gauge_check,
    "verify": _cmd_verify,
}


def run(argv):
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = _load_config(args.subcommand, args)
    _DISPATCH[args.subcommand](cfg)
    return 0


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    try:
        return run(argv)
    except ValidationError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
