"""Command line entry point: one JSON document out, diagnostics on stderr.

Subcommands orchestrate the library: `describe` dumps the combinatorial
data, `spectra` / `positive-point` certify the Perron structure, `mirror`
solves the superpotential critical point, `integrals` compares the two
oscillatory integrals on a grid, `gamma` extracts the Gamma-class limit and
`asymptotics` runs the decay-class membership test.  Exit code 0 means every
requested check passed.  A config file may pre-set any long flag
(key = value per line); GAMMAFLAG_THREADS caps the grid parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import flatsections as fs
from . import lie
from . import mirror as mi
from . import qh
from . import reporting
from .gammaclass import gamma_class
from .spaces import SpaceSpec, flag_space


@dataclass
class RunConfig:
    tol: float = 1e-6
    order: int = 60
    seed: int = 20240809
    hbar_grid: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    s_grid: list[float] = field(default_factory=lambda: list(np.linspace(10, 60, 9)))
    h: list[float] = field(default_factory=list)
    q: list[float] = field(default_factory=lambda: [1.0])
    t: list[float] = field(default_factory=lambda: [1.0])
    emit_plot_data: str = ""
    output_format: str = "json"
    threads: int = 1

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.hbar_grid or not self.s_grid:
            raise ValueError("grids must be nonempty")


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()] if text else []


def _read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _threads() -> int:
    raw = os.environ.get("GAMMAFLAG_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gammaflag",
        description="Quantum connections, Gamma classes and Rietsch mirrors for flag varieties.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--space", required=True, help="label (P1, P2, Gr24, Fl3) or type+rank like A3")
        p.add_argument("--ip", default=None, help="parabolic subset, 1-based, comma separated")
        p.add_argument("--config", default="", help="key=value file pre-setting any long flag")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--order", type=int, default=60)
        p.add_argument("--seed", type=int, default=20240809)
        p.add_argument("--emit-plot-data", default="", metavar="DIR")
        p.add_argument("--format", dest="output_format", choices=["json", "csv"], default="json")
        return p

    common(sub.add_parser("describe", help="roots, minimal representatives, gradings"))
    p = common(sub.add_parser("spectra", help="certify the Perron eigenvalue of c1"))
    p.add_argument("--q", default="1", help="positive quantum parameters")
    p = common(sub.add_parser("positive-point", help="evaluate Schubert classes at the Perron point"))
    p.add_argument("--q", default="1")
    p = common(sub.add_parser("mirror", help="superpotential critical point against the spectrum"))
    p.add_argument("--t", default="1", help="positive torus point")
    p.add_argument("--hbar-grid", dest="hbar_grid", default="0.5,1,2")
    p.add_argument("--h", default="", help="equivariant parameters (blank for none)")
    p = common(sub.add_parser("integrals", help="compare the two oscillatory integrals"))
    p.add_argument("--q", default="0.5,1,2")
    p.add_argument("--hbar-grid", dest="hbar_grid", default="0.5,1,2")
    p.add_argument("--h", default="", help="equivariant parameters (blank for none)")
    p = common(sub.add_parser("gamma", help="Gamma class and the normalized limit of J"))
    p.add_argument("--s-grid", dest="s_grid", default="10:60:9")
    p = common(sub.add_parser("asymptotics", help="decay-class membership of the Gamma section"))
    p.add_argument("--hbar-grid", dest="hbar_grid", default="0.05:0.8:12")
    return parser


def _parse_grid(text: str) -> list[float]:
    if ":" in text:
        lo, hi, num = text.split(":")
        return list(np.linspace(float(lo), float(hi), int(num)))
    return _parse_floats(text)


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(
        tol=args.tol,
        order=args.order,
        seed=args.seed,
        emit_plot_data=getattr(args, "emit_plot_data", "") or "",
        output_format=getattr(args, "output_format", "json"),
        threads=_threads(),
    )
    if getattr(args, "hbar_grid", None):
        cfg.hbar_grid = _parse_grid(args.hbar_grid)
    if getattr(args, "s_grid", None):
        cfg.s_grid = _parse_grid(args.s_grid)
    if getattr(args, "q", None):
        cfg.q = _parse_floats(args.q)
    if getattr(args, "t", None):
        cfg.t = _parse_floats(args.t)
    if getattr(args, "h", None):
        cfg.h = _parse_floats(args.h)
    return cfg


def _space_from_args(args) -> SpaceSpec:
    return SpaceSpec.parse(args.space, args.ip)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- commands -----------------------------------------------------------------


def cmd_describe(spec: SpaceSpec, cfg: RunConfig) -> tuple[dict, bool]:
    from .schubert import pairing_matrix_csv, restriction_table_csv

    space = flag_space(spec)
    qd = qh.QuantumData(space)
    betas = lie.beta_sequence(space.system, space.parabolic.w_P.word, group=space.group)
    doc = json.loads(lie.serialize(space.system, space.parabolic))
    doc["space"] = spec.name()
    doc["c1_pairings"] = {f"q{i + 1}": qd.c1_pairing(i) for i in qd.divisor_indices}
    doc["beta_multiset"] = [list(b) for b in betas]
    if cfg.emit_plot_data:
        os.makedirs(cfg.emit_plot_data, exist_ok=True)
        for name, text in (("restriction_table", restriction_table_csv(space)),
                           ("pairing_matrix", pairing_matrix_csv(space))):
            path = os.path.join(cfg.emit_plot_data, f"{spec.name()}_{name}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
    if cfg.output_format == "csv":
        doc["csv"] = restriction_table_csv(space)
    return doc, True


def cmd_spectra(spec: SpaceSpec, cfg: RunConfig) -> tuple[dict, bool]:
    space = flag_space(spec)
    qd = qh.QuantumData(space)
    q = cfg.q if len(cfg.q) == len(qd.divisor_indices) else [cfg.q[0]] * len(qd.divisor_indices)
    rep = qh.conjecture_O_certify(qd, q, label=spec.name())
    return rep.as_dict(), rep.status == "certified"


def cmd_positive_point(spec: SpaceSpec, cfg: RunConfig) -> tuple[dict, bool]:
    space = flag_space(spec)
    qd = qh.QuantumData(space)
    q = cfg.q if len(cfg.q) == len(qd.divisor_indices) else [cfg.q[0]] * len(qd.divisor_indices)
    spectral = qh.conjecture_O_certify(qd, q, label=spec.name())
    point = qh.schubert_positive_point(qd, q, label=spec.name())
    doc = spectral.as_dict()
    doc.update(point.as_dict())
    ok = (
        spectral.status == "certified"
        and all(v > 0 for v in point.values.values())
        and abs(point.c1_value - point.E_O) < max(cfg.tol, 1e-9)
    )
    return doc, ok


def cmd_mirror(spec: SpaceSpec, cfg: RunConfig) -> tuple[dict, bool]:
    if not spec.is_type_a:
        raise mi.MirrorError(f"mirror-side commands need type A, got {spec.name()}")
    space = flag_space(spec)
    msp = mi.MirrorSpace(space)
    qd = qh.QuantumData(space)
    t = cfg.t if len(cfg.t) == len(qd.divisor_indices) else [cfg.t[0]] * len(qd.divisor_indices)
    cp = mi.critical_point(msp, t)
    rep = qh.conjecture_O_certify(qd, t, label=spec.name())
    integrals = []
    for hb in cfg.hbar_grid:
        res = mi.ib_integral(msp, float(hb), cfg.h or None, t)
        integrals.append({"hbar": float(hb), "h": list(cfg.h),
                          "value": _c2d(res.value), "err": res.error})
    doc = {
        "space": spec.name(),
        "t": [float(x) for x in t],
        "a_star": [float(x) for x in cp.a_star],
        "f_star": cp.f_star,
        "E_O": rep.E_O,
        "abs_diff": abs(cp.f_star - rep.E_O),
        "hessian_det": cp.hessian_det,
        "integral_values": integrals,
    }
    return doc, doc["abs_diff"] < max(cfg.tol, 1e-8)


def cmd_integrals(spec: SpaceSpec, cfg: RunConfig) -> tuple[dict, bool]:
    if not spec.is_type_a:
        raise mi.MirrorError(f"mirror-side commands need type A, got {spec.name()}")
    space = flag_space(spec)
    msp = mi.MirrorSpace(space)
    qd = qh.QuantumData(space)
    ia = fs.IAIntegrator(qd, order=cfg.order)
    h = cfg.h or None
    jobs = [(float(hb), float(qv)) for hb in cfg.hbar_grid for qv in cfg.q]

    def one(job):
        hb, qv = job
        q = [qv] * len(qd.divisor_indices)
        va = ia.unit_value(hb, h, q)
        vb = mi.ib_integral(msp, hb, h, q).value
        return {"hbar": hb, "q": qv, "h": list(cfg.h), "IA": _c2d(va), "IB": _c2d(vb),
                "abs_err": abs(va - vb)}

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(one, jobs))
    else:
        rows = [one(j) for j in jobs]
    worst = max(row["abs_err"] for row in rows)
    doc = {"test": "oscillatory-integral-comparison", "space": spec.name(), "rows": rows,
           "max_abs_err": worst, "tol": cfg.tol,
           "status": "pass" if worst < cfg.tol else "fail"}
    if cfg.emit_plot_data:
        xs = list(range(len(rows)))
        reporting.emit_series(cfg.emit_plot_data, f"{spec.name()}_integrals_err",
                              xs, [max(r["abs_err"], 1e-18) for r in rows],
                              title=f"|IA - IB| on the grid ({spec.name()})",
                              xlabel="grid index", ylabel="abs err", logy=True)
        reporting.emit_series(cfg.emit_plot_data, f"{spec.name()}_integrals_value",
                              xs, [r["IA"]["re"] for r in rows],
                              title=f"Re IA on the grid ({spec.name()})",
                              xlabel="grid index", ylabel="Re IA")
    return doc, worst < cfg.tol


def cmd_gamma(spec: SpaceSpec, cfg: RunConfig) -> tuple[dict, bool]:
    space = flag_space(spec)
    qd = qh.QuantumData(space)
    gamma = gamma_class(space)
    order = max(cfg.order, 240)
    rep = fs.gamma_limit(qd, cfg.s_grid, order=order, gamma=gamma)
    doc = {
        "test": "gamma-class-limit",
        "space": spec.name(),
        "s_grid": rep.s_grid,
        "estimate": [float(x) for x in rep.estimate],
        "expected": [float(x) for x in rep.expected],
        "error_bars": [float(x) for x in rep.error_bars],
        "abs_err": rep.max_abs_err(),
        "status": rep.status,
        "schubert_basis": [w.label() for w in space.reps],
    }
    ok = rep.status == "convergent" and rep.max_abs_err() < max(cfg.tol, 1e-3)
    if cfg.emit_plot_data:
        for comp in range(rep.raw.shape[1]):
            label = space.reps[comp].label()
            reporting.emit_series(
                cfg.emit_plot_data, f"{spec.name()}_gamma_component_{label}",
                rep.s_grid, [float(v) for v in rep.raw[:, comp].real],
                title=f"normalized J component on {label} ({spec.name()})",
                xlabel="s", ylabel=f"J_{label} / J_e",
            )
    return doc, ok


def cmd_asymptotics(spec: SpaceSpec, cfg: RunConfig) -> tuple[dict, bool]:
    if not spec.is_type_a:
        raise mi.MirrorError(f"mirror-side commands need type A, got {spec.name()}")
    space = flag_space(spec)
    qd = qh.QuantumData(space)
    rep_spec = qh.conjecture_O_certify(qd, [1.0] * len(qd.divisor_indices))
    section = fs.gamma_flat_section(qd)
    grid = cfg.hbar_grid
    rep = fs.asymptotic_class_test(qd, section, rep_spec.E_O, grid)
    pert = fs.perturbed_section(qd, section, float(max(grid)))
    rep_pert = fs.asymptotic_class_test(qd, pert, rep_spec.E_O, grid)
    doc = {
        "test": "decay-class-membership",
        "space": spec.name(),
        "E": rep_spec.E_O,
        "passes": rep.passes,
        "slope": rep.slope,
        "fit_residual": rep.fit_residual,
        "flat_residual": rep.flat_residual,
        "perturbed_fails": not rep_pert.passes,
        "grid": rep.grid,
        "log_norms": rep.log_norms,
    }
    if cfg.emit_plot_data:
        reporting.emit_series(
            cfg.emit_plot_data, f"{spec.name()}_asymptotics",
            list(np.log(rep.grid)), rep.log_norms,
            title=f"decay fit at E = {rep_spec.E_O:.4f} ({spec.name()})",
            xlabel="log hbar", ylabel="log ||exp(E/hbar) s||",
        )
    return doc, rep.passes and not rep_pert.passes


def _c2d(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


COMMANDS = {
    "describe": cmd_describe,
    "spectra": cmd_spectra,
    "positive-point": cmd_positive_point,
    "mirror": cmd_mirror,
    "integrals": cmd_integrals,
    "gamma": cmd_gamma,
    "asymptotics": cmd_asymptotics,
}


_CONFIG_TYPES = {"tol": float, "order": int, "seed": int}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        given = set(sys.argv[1:] if argv is None else argv)
        for key, value in _read_config(args.config).items():
            flag = "--" + key.replace("_", "-")
            if any(tok == flag or tok.startswith(flag + "=") for tok in given):
                continue  # explicit flags win over the config file
            if hasattr(args, key):
                setattr(args, key, _CONFIG_TYPES.get(key, str)(value))
    np.random.seed(getattr(args, "seed", 20240809) % (2**32))
    try:
        cfg = _config_from_args(args)
        spec = _space_from_args(args)
        _log(f"gammaflag {args.command} on {spec.name()}")
        doc, ok = COMMANDS[args.command](spec, cfg)
    except (ValueError, qh.QHError, mi.MirrorError, fs.FlatSectionError, lie.LieError) as exc:
        _log(f"error: {exc}")
        print(json.dumps({"error": str(exc)}))
        return 2
    if cfg.output_format == "csv" and "rows" in doc:
        sys.stdout.write(reporting.rows_to_csv(_flatten_rows(doc["rows"])))
    elif cfg.output_format == "csv" and "csv" in doc:
        sys.stdout.write(doc["csv"])
    else:
        print(json.dumps(doc, indent=2, default=_json_default))
    return 0 if ok else 1


def _flatten_rows(rows: list[dict]) -> list[dict]:
    flat = []
    for row in rows:
        out = {}
        for k, v in row.items():
            if isinstance(v, dict):
                for kk, vv in v.items():
                    out[f"{k}_{kk}"] = vv
            elif isinstance(v, list):
                out[k] = ";".join(str(x) for x in v)
            else:
                out[k] = v
        flat.append(out)
    return flat


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON serializable: {type(obj)}")


if __name__ == "__main__":
    sys.exit(main())
