"""``releq`` command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
``RELEQ_THREADS`` caps the BLAS/OpenMP thread pools (read before numpy loads).
"""

from __future__ import annotations

import os

_threads = os.environ.get("RELEQ_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import sys  # noqa: E402
from dataclasses import dataclass, field  # noqa: E402
from pathlib import Path  # noqa: E402
from typing import Optional  # noqa: E402

import numpy as np  # noqa: E402

from . import io as rio  # noqa: E402
from .errors import ReleqError  # noqa: E402
from .reduction import ContinuationOptions, ReducedSystem, re_set_general  # noqa: E402
from .rotors import RotorBodySystem, integrate_reduced, scenario_report  # noqa: E402
from .stability import classify_branch  # noqa: E402
from .universal import (  # noqa: E402
    QuadraticModel,
    classify_stratum,
    count_re_on_sphere,
    em_discriminant,
    enumerate_branches,
    pitchfork_points,
    re_on_sphere,
    saddle_centre_points,
    GENERIC,
)
from .versality import determinacy_check, family_derivatives_g, quadratic_h, versality_check  # noqa: E402

DEFAULT_TOLS = {
    "stratum": 0.0,
    "hessian": 1e-9,
    "spectrum": None,
    "rank": 1e-9,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    abc: Optional[tuple] = None
    alpha: Optional[tuple] = None
    system: Optional[str] = None
    radius: float = 2.0
    j: Optional[float] = None
    degree: int = 2
    method: str = "closed"
    fmt: str = "json"
    out: Optional[str] = None
    tols: dict = field(default_factory=lambda: dict(DEFAULT_TOLS))
    integrate: Optional[tuple] = None
    T: float = 100.0
    dt: Optional[float] = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("window radius must be positive")
        for k, v in self.tols.items():
            if v is None:
                continue
            if v < 0 or (k != "stratum" and v == 0) or not np.isfinite(v):
                raise ConfigError(f"tolerance --tol-{k} must be positive")

    def model(self) -> QuadraticModel:
        if self.abc is None:
            raise ConfigError("--abc is required")
        return QuadraticModel(*self.abc)

    def alpha_vec(self) -> np.ndarray:
        return np.array(self.alpha if self.alpha is not None else (0.0, 0.0, 0.0))


def _triple(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="releq", description="Relative equilibria near zero momentum.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, radius=True, formats=("json", "csv")):
        sp.add_argument("--abc", type=_triple, help="quadratic coefficients a,b,c with a>b>c")
        sp.add_argument("--alpha", type=_triple, default=None, help="unfolding parameter (default 0,0,0)")
        if radius:
            sp.add_argument("--radius", type=float, default=2.0, help="window radius (default 2)")
        sp.add_argument("--format", dest="fmt", choices=formats, default="json")
        sp.add_argument("--out", default=None, help="output file or directory (default stdout)")
        sp.add_argument("--tol-stratum", type=float, default=DEFAULT_TOLS["stratum"],
                        help="|alpha_i| at or below this counts as zero (default 0)")
        sp.add_argument("--tol-hessian", type=float, default=DEFAULT_TOLS["hessian"],
                        help="relative eigenvalue floor of the projected Hessian (default 1e-9)")
        sp.add_argument("--tol-spectrum", type=float, default=DEFAULT_TOLS["spectrum"],
                        help="real-part tolerance for eigenvalues (default scaled by |L|)")
        sp.add_argument("--tol-rank", type=float, default=DEFAULT_TOLS["rank"],
                        help="relative singular-value threshold for jet ranks (default 1e-9)")

    sp = sub.add_parser("branches", help="RE branches with stability labels")
    common(sp)
    sp.add_argument("--system", default=None, help="reduced system JSON (uses continuation)")
    sp.add_argument("--method", choices=("closed", "continuation"), default="closed")

    sp = sub.add_parser("em-discriminant", help="energy-momentum image of the RE set")
    common(sp)

    sp = sub.add_parser("bifurcations", help="pitchfork and saddle-centre points")
    common(sp)

    sp = sub.add_parser("sphere-count", help="number of RE on the sphere j = J")
    common(sp, radius=False, formats=("json", "csv", "text"))
    sp.add_argument("--j", type=float, required=True)

    sp = sub.add_parser("rotors", help="rotor scenario report")
    common(sp, radius=False)
    sp.add_argument("--system", "--config", dest="system", required=True, help="rotor system JSON")
    sp.add_argument("--j", type=float, default=None, help="largest j swept (default: j_max from the file)")
    sp.add_argument("--integrate", type=_triple, default=None, metavar="X,Y,Z",
                    help="emit a trajectory from this body momentum instead of the report")
    sp.add_argument("--T", type=float, default=100.0, help="trajectory duration (default 100)")
    sp.add_argument("--dt", type=float, default=None, help="RK4 step (default: fraction of the period)")

    sp = sub.add_parser("versality", help="jet-level codimension report")
    common(sp, radius=False)
    sp.add_argument("--degree", type=int, default=2)
    return p


def config_from_args(ns) -> RunConfig:
    tols = {"stratum": ns.tol_stratum, "hessian": ns.tol_hessian,
            "spectrum": ns.tol_spectrum, "rank": ns.tol_rank}
    return RunConfig(
        command=ns.command,
        abc=ns.abc,
        alpha=ns.alpha,
        system=getattr(ns, "system", None),
        radius=getattr(ns, "radius", 2.0),
        j=getattr(ns, "j", None),
        degree=getattr(ns, "degree", 2),
        method=getattr(ns, "method", "closed"),
        fmt=ns.fmt,
        out=ns.out,
        tols=tols,
        integrate=getattr(ns, "integrate", None),
        T=getattr(ns, "T", 100.0),
        dt=getattr(ns, "dt", None),
    )


# ---------------------------------------------------------------------------
# output


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _data(cfg: RunConfig, doc: dict, rows: Optional[list] = None, columns: Optional[list] = None):
    """Write ``doc`` as JSON, or the flat ``rows`` as CSV."""
    if cfg.fmt == "json" or rows is None:
        _emit(rio.dumps(doc), cfg.out)
        return
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    _emit(buf.getvalue(), cfg.out)


def _vec(v):
    return [float(x) for x in v]


# ---------------------------------------------------------------------------
# commands


def _classify_kw(cfg):
    return {"hessian_tol": cfg.tols["hessian"], "spec_tol": cfg.tols["spectrum"]}


def cmd_branches(cfg: RunConfig) -> int:
    if cfg.system is not None or cfg.method == "continuation":
        rsys = ReducedSystem.from_json(cfg.system) if cfg.system else ReducedSystem.from_family(cfg.model(), cfg.alpha_vec())
        branches = re_set_general(rsys, cfg.radius, ContinuationOptions())
        meta = {"source": "continuation", "system": rsys.name, "radius": cfg.radius}
    else:
        model, alpha = cfg.model(), cfg.alpha_vec()
        rsys = ReducedSystem.from_family(model, alpha)
        branches = enumerate_branches(model, alpha, cfg.radius, threshold=cfg.tols["stratum"])
        st = classify_stratum(alpha, cfg.tols["stratum"])
        meta = {"source": "closed_form", "abc": [model.a, model.b, model.c], "alpha": _vec(alpha),
                "radius": cfg.radius, "stratum": st.tag, "component": st.component}
    for b in branches:
        classify_branch(rsys, b, **_classify_kw(cfg))
    if cfg.out is not None and (Path(cfg.out).is_dir() or not Path(cfg.out).suffix):
        outdir = Path(cfg.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for b in branches:
            name = outdir / f"branch_{b.branch_id}.{cfg.fmt}"
            text = rio.branches_to_csv([b]) if cfg.fmt == "csv" else rio.branches_to_json([b], meta)
            name.write_text(text)
        return 0
    text = rio.branches_to_csv(branches) if cfg.fmt == "csv" else rio.branches_to_json(branches, meta)
    _emit(text, cfg.out)
    return 0


def cmd_em_discriminant(cfg: RunConfig) -> int:
    model, alpha = cfg.model(), cfg.alpha_vec()
    polys = em_discriminant(model, alpha, cfg.radius, enumerate_branches(model, alpha, cfg.radius,
                                                                         threshold=cfg.tols["stratum"]))
    doc = {
        "schema_version": rio.SCHEMA_VERSION,
        "abc": [model.a, model.b, model.c],
        "alpha": _vec(alpha),
        "radius": cfg.radius,
        "fold_count": sum(len(p.folds) for p in polys),
        "crossing_count": len({(round(j, 12), round(h, 12)) for p in polys for j, h in p.crossings}),
        "polylines": [
            {"branch_id": p.branch_id, "j": _vec(p.j), "h": _vec(p.h),
             "folds": [{"j": j, "h": h, "kind": k} for j, h, k in p.folds],
             "crossings": [{"j": j, "h": h} for j, h in p.crossings]}
            for p in polys
        ],
    }
    rows = [(p.branch_id, j, h) for p in polys for j, h in zip(p.j, p.h)]
    _data(cfg, doc, rows, ["branch_id", "j", "h"])
    return 0


def cmd_bifurcations(cfg: RunConfig) -> int:
    model, alpha = cfg.model(), cfg.alpha_vec()
    st = classify_stratum(alpha, cfg.tols["stratum"])
    points = []
    if st.tag == GENERIC:
        for sc in saddle_centre_points(model, alpha):
            points.append({"kind": "saddle_centre", "lambda": sc.lam, "mu": _vec(sc.mu), "j": sc.j})
    elif st.zero_axes != (0, 1, 2):
        for pf in pitchfork_points(model, alpha, cfg.tols["stratum"]):
            points.append({"kind": "pitchfork", "lambda": pf.lam, "mu": _vec(pf.mu),
                           "j": 0.5 * float(pf.mu @ pf.mu), "axis": "xyz"[pf.axis]})
    doc = {"abc": [model.a, model.b, model.c], "alpha": _vec(alpha), "stratum": st.tag,
           "component": st.component, "points": points}
    rows = [(p["kind"], p["lambda"], *p["mu"], p["j"]) for p in points]
    _data(cfg, doc, rows, ["kind", "lambda", "x", "y", "z", "j"])
    return 0


def cmd_sphere_count(cfg: RunConfig) -> int:
    if cfg.j is None or not cfg.j > 0:
        raise ConfigError("--j must be positive")
    model, alpha = cfg.model(), cfg.alpha_vec()
    n = count_re_on_sphere(model, alpha, cfg.j, cfg.tols["stratum"])
    if cfg.fmt == "text":
        _emit(f"{n}\n", cfg.out)
        return 0
    pts = re_on_sphere(model, alpha, cfg.j, cfg.tols["stratum"])
    doc = {"abc": [model.a, model.b, model.c], "alpha": _vec(alpha), "j": cfg.j, "count": n,
           "points": [_vec(p) for p in pts]}
    _data(cfg, doc, [tuple(p) for p in pts], ["x", "y", "z"])
    return 0


def cmd_rotors(cfg: RunConfig) -> int:
    try:
        raw = json.loads(Path(cfg.system).read_text())
        rs = RotorBodySystem.from_config(raw)
    except (KeyError, OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad rotor system file: {exc}")
    if cfg.integrate is not None:
        traj = integrate_reduced(rs, np.array(cfg.integrate), cfg.T, cfg.dt)
        _emit(rio.trajectory_to_csv(traj), cfg.out)
        return 0
    j_max = cfg.j if cfg.j is not None else raw.get("j_max")
    if j_max is None or not j_max > 0:
        raise ConfigError("--j (or j_max in the system file) must be positive")
    rep = scenario_report(rs, float(j_max))
    doc = rep.to_dict()
    rows = [(e.kind, e.j, *e.mu_body, e.energy_rank, e.before, e.after) for e in rep.events]
    _data(cfg, doc, rows, ["kind", "j", "x", "y", "z", "energy_rank", "before", "after"])
    return 0


def cmd_versality(cfg: RunConfig) -> int:
    if cfg.degree < 1:
        raise ConfigError("--degree must be >= 1")
    a, b, c = cfg.abc if cfg.abc is not None else (3.0, 2.0, 1.0)
    h = quadratic_h(a, b, c)
    ok, rep = versality_check(h, family_derivatives_g(cfg.degree), cfg.degree, cfg.tols["rank"])
    rep.determined = determinacy_check(h, cfg.degree, cfg.tols["rank"])
    doc = rep.to_dict()
    rows = [(k, *[cell for row in m for cell in row]) for k, m in enumerate(doc["complement_basis"])]
    _data(cfg, doc, rows, ["index", "e11", "e12", "e13", "e21", "e22", "e23"])
    return 0


COMMANDS = {
    "branches": cmd_branches,
    "em-discriminant": cmd_em_discriminant,
    "bifurcations": cmd_bifurcations,
    "sphere-count": cmd_sphere_count,
    "rotors": cmd_rotors,
    "versality": cmd_versality,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"releq: error: {exc}", file=sys.stderr)
        return 2
    except (ReleqError, RuntimeError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"releq: numerical failure: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        # reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
