"""Command-line front end: profile, certify, spectrum, evolve, scan, portrait.

Every command computes its results in memory first, then writes the output
files and a JSON manifest (config echo, input hash, output hashes).  Nothing
is written when a command fails.  Exit codes: 0 success, 2 validation error,
3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
import hashlib
import io
import json
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .errors import ImplosionError, NegativeRadicand, ValidationError
from .params_phase import (
    SQRT3, FluidParams, admissibility, auxiliary_inequalities, eval_phase_polynomials, r_star, sonic_data,
)
from .profile_solver import build_profile, profile_residual

ENV_OUTPUT_DIR = "IMPLOSION_OUTPUT_DIR"
COMMANDS = ("profile", "certify", "spectrum", "evolve", "scan", "portrait")

DEFAULTS = {
    "gamma": 5.0 / 3.0, "r": 1.15, "nu": 0,
    "tol": 1e-10, "order": 6, "step_eps": 1e-3, "xi_min": -8.0, "xi_max": 12.0, "n_grid": 4096,
    "fan_offset": 1e-9,
    # spectrum
    "n1_max": 8, "grid_n": 1024, "C0": 10.0, "J": 40.0, "delta_g": 0.1, "lower_order": "displayed",
    # evolve
    "s0": 20.0, "s_end": 21.0, "R_max": 10.0, "evolve_grid_n": 1024, "torus_L": None, "K": 1,
    "weight_R0": 5.0, "weight_eta": 0.1, "n_out": 11, "rtol": 1e-8,
    # scan
    "gamma_min": 1.05, "gamma_max": 3.0, "n_gamma": 50, "n_r": 20, "r_min": None, "r_max": None,
    "workers": 4, "with_profiles": False,
    # portrait
    "svg_width": 800, "svg_height": 600, "portrait_n": 400, "allow_inadmissible": False,
}


# --- configuration -----------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="implosion", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with option values (flags override it)")
        sp.add_argument("--out", dest="output_dir", help=f"output directory (default ${ENV_OUTPUT_DIR} or ./out)")
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--r", type=float)
        sp.add_argument("--nu", type=int, choices=(0, 1))
        sp.add_argument("--tol", type=float)
        sp.add_argument("--order", type=int)
        sp.add_argument("--step-eps", type=float)
        sp.add_argument("--xi-min", type=float)
        sp.add_argument("--xi-max", type=float)
        sp.add_argument("--n-grid", type=int)
        sp.add_argument("--fan-offset", type=float)

    sp = sub.add_parser("profile", help="integrate the self-similar profile")
    common(sp)
    sp = sub.add_parser("certify", help="repulsivity margins and barrier checks")
    common(sp)
    sp = sub.add_parser("spectrum", help="unstable-mode census per spherical-harmonic degree")
    common(sp)
    sp.add_argument("--n1-max", type=int)
    sp.add_argument("--grid-n", type=int)
    sp.add_argument("--C0", type=float)
    sp.add_argument("--J", type=float)
    sp.add_argument("--delta-g", type=float)
    sp.add_argument("--lower-order", choices=("displayed", "consistent"))
    sp = sub.add_parser("evolve", help="radial self-similar evolution from the profile")
    common(sp)
    sp.add_argument("--s0", type=float)
    sp.add_argument("--s-end", type=float)
    sp.add_argument("--R-max", type=float)
    sp.add_argument("--evolve-grid-n", type=int)
    sp.add_argument("--torus-L", type=float)
    sp.add_argument("--K", type=int)
    sp.add_argument("--weight-R0", type=float)
    sp.add_argument("--weight-eta", type=float)
    sp.add_argument("--n-out", type=int)
    sp.add_argument("--rtol", type=float)
    sp = sub.add_parser("scan", help="admissibility and auxiliary inequalities over a (gamma, r) grid")
    common(sp)
    sp.add_argument("--gamma-min", type=float)
    sp.add_argument("--gamma-max", type=float)
    sp.add_argument("--n-gamma", type=int)
    sp.add_argument("--n-r", type=int)
    sp.add_argument("--r-min", type=float)
    sp.add_argument("--r-max", type=float)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--with-profiles", action="store_true", default=None)
    sp = sub.add_parser("portrait", help="phase portrait as layered SVG plus curve CSVs")
    common(sp)
    sp.add_argument("--svg-width", type=int)
    sp.add_argument("--svg-height", type=int)
    sp.add_argument("--portrait-n", type=int)
    sp.add_argument("--allow-inadmissible", action="store_true", default=None,
                    help="draw the closed-form curves even when r >= r_star(gamma)")
    return p


def load_config(argv) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    ns = _parser().parse_args(argv)
    cfg = dict(DEFAULTS)
    if ns.config:
        try:
            with open(ns.config) as fh:
                file_cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from exc
        unknown = sorted(set(file_cfg) - set(DEFAULTS) - {"output_dir"})
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        cfg.update(file_cfg)
    for k, v in vars(ns).items():
        if k in ("config", "command") or v is None:
            continue
        cfg[k] = v
    cfg["command"] = ns.command
    if not cfg.get("output_dir"):
        cfg["output_dir"] = os.environ.get(ENV_OUTPUT_DIR, "out")
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    def positive(*keys):
        for k in keys:
            if cfg[k] is not None and not cfg[k] > 0:
                raise ValidationError(f"{k} must be positive, got {cfg[k]}")

    if cfg["command"] not in COMMANDS:
        raise ValidationError(f"unknown command {cfg['command']!r}")
    positive("tol", "step_eps", "n_grid", "grid_n", "C0", "J", "delta_g", "R_max", "evolve_grid_n",
             "n_gamma", "n_r", "workers", "svg_width", "svg_height", "portrait_n", "rtol", "n_out")
    if cfg["torus_L"] is not None:
        positive("torus_L")
    if cfg["xi_min"] >= cfg["xi_max"]:
        raise ValidationError("xi_min must be below xi_max")
    if cfg["s_end"] <= cfg["s0"]:
        raise ValidationError("s_end must exceed s0")
    if cfg["gamma_min"] <= 1.0 or cfg["gamma_max"] < cfg["gamma_min"]:
        raise ValidationError("need 1 < gamma_min <= gamma_max")
    if (cfg["r_min"] is None) != (cfg["r_max"] is None):
        raise ValidationError("give both r_min and r_max or neither")
    if cfg["n1_max"] < 0:
        raise ValidationError("n1_max must be >= 0")


def _canonical(obj):
    """JSON-safe copy with numpy scalars converted and non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    return obj


def dumps(obj) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, indent=2) + "\n"


def config_hash(cfg: dict) -> str:
    echo = {k: v for k, v in cfg.items() if k != "output_dir"}
    return hashlib.sha256((dumps(echo) + __version__).encode()).hexdigest()


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    s = str(v)
    return '"' + s.replace('"', "'") + '"' if ("," in s or '"' in s) else s


# --- commands ----------------------------------------------------------------

def _params(cfg) -> FluidParams:
    return FluidParams.admissible(cfg["gamma"], cfg["r"], cfg["nu"])


def _profile(cfg, params=None):
    params = params or _params(cfg)
    return build_profile(params, order=cfg["order"], step_eps=cfg["step_eps"], xi_min=cfg["xi_min"],
                         xi_max=cfg["xi_max"], tol=cfg["tol"], n_grid=cfg["n_grid"], fan_offset=cfg["fan_offset"])


def _profile_summary(prof) -> dict:
    return {"residual": profile_residual(prof), "w0": prof.w0, "w0_fit": prof.w0_fit, "w1_fit": prof.w1_fit,
            "w3_fit": prof.w3_fit, "farfield_exponent_fit": prof.farfield_exponent_fit,
            "farfield_window": list(prof.farfield_window), "diagnostics": prof.diagnostics}


def cmd_profile(cfg) -> tuple[dict, dict]:
    prof = _profile(cfg)
    files = {"profile.csv": csv_text(["R", "U_bar", "S_bar", "dU_dR", "dS_dR"], prof.csv_rows())}
    return files, {"profile": _profile_summary(prof)}


def cmd_certify(cfg) -> tuple[dict, dict]:
    from .repulsivity_verifier import certify

    prof = _profile(cfg)
    rep = certify(prof)
    rows = [(b.name, b.min_margin, b.location, b.holds) for b in rep.barrier_checks]
    files = {"barriers.csv": csv_text(["name", "min_margin", "location_xi", "holds"], rows),
             "certify.json": dumps(rep.to_dict())}
    return files, {"profile": _profile_summary(prof), "certified": rep.certified}


def cmd_spectrum(cfg) -> tuple[dict, dict]:
    from .linear_modes import CutoffConfig, assemble_mode, mode_spectrum, profile_tables

    prof = _profile(cfg)
    mc = CutoffConfig(C0=cfg["C0"], J=cfg["J"], delta_g=cfg["delta_g"], grid_n=cfg["grid_n"])
    tables = profile_tables(prof, mc.radii)
    spec_rows, census = [], []
    for n1 in range(cfg["n1_max"] + 1):
        ms = assemble_mode(prof, mc, n1=n1, lower_order=cfg["lower_order"], tables=tables)
        sp = mode_spectrum(ms)
        for i, z in enumerate(sp.eigenvalues):
            spec_rows.append((n1, i, z.real, z.imag))
        census.append((n1, sp.dim_unstable, sp.eigenvalues[0].real, sp.n_blocks, sp.largest_block))
    files = {"spectrum.csv": csv_text(["n1", "index", "re", "im"], spec_rows),
             "census.csv": csv_text(["n1", "unstable_count", "max_re", "n_blocks", "largest_block"], census)}
    return files, {"census": {str(c[0]): c[1] for c in census}, "cutoff": mc.descriptors()}


def cmd_evolve(cfg) -> tuple[dict, dict]:
    from .selfsim_evolution import Weight, diagnostics_csv, evolve, profile_state

    params = FluidParams.admissible(cfg["gamma"], cfg["r"], cfg["nu"])
    prof = _profile(cfg, params)
    st = profile_state(prof, cfg["R_max"], cfg["evolve_grid_n"], s=cfg["s0"], nu=cfg["nu"],
                       torus_L=cfg["torus_L"], weight=Weight(cfg["weight_R0"], cfg["weight_eta"]))
    st, rows = evolve(st, cfg["s_end"], rtol=cfg["rtol"], n_out=cfg["n_out"], K=cfg["K"])
    files = {"diagnostics.csv": diagnostics_csv(rows),
             "state.csv": csv_text(["R", "U", "S"], np.column_stack([st.R_grid, st.U, st.S]))}
    return files, {"final": rows[-1], "valid": st.valid}


def _scan_point(job):
    g, r, with_profiles = job
    row = {"gamma": g, "r": r, "r_star": r_star(g), "admissible": bool(1.0 < r < r_star(g)), "error": ""}
    try:
        p = FluidParams(g, r)
        row["delta_dis"] = p.delta_dis
        row["ns_ok"] = admissibility(p).ns_ok
        if row["admissible"]:
            aux = auxiliary_inequalities(p)
            for k, (_, v, ok) in enumerate(aux, start=1):
                row[f"aux{k}"] = v
                row[f"aux{k}_holds"] = ok
            row["aux_all_hold"] = all(ok for _, _, ok in aux)
            if with_profiles:
                from .repulsivity_verifier import certify

                rep = certify(build_profile(p))
                row.update(eta_radial=rep.eta_radial, eta_angular=rep.eta_angular,
                           eta_integrated=rep.eta_integrated, certified=rep.certified)
    except ImplosionError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def scan_grid(cfg):
    gammas = np.linspace(cfg["gamma_min"], cfg["gamma_max"], cfg["n_gamma"])
    pts = []
    for g in gammas:
        g = float(g)
        if cfg["r_min"] is None:
            rs = r_star(g)
            rvals = [1.0 + (rs - 1.0) * k / (cfg["n_r"] + 1) for k in range(1, cfg["n_r"] + 1)]
        else:
            rvals = [float(x) for x in np.linspace(cfg["r_min"], cfg["r_max"], cfg["n_r"])]
        pts.extend((g, r) for r in rvals)
    return pts


def cmd_scan(cfg) -> tuple[dict, dict]:
    jobs = [(g, r, bool(cfg["with_profiles"])) for g, r in scan_grid(cfg)]
    if cfg["workers"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as ex:
            rows = list(ex.map(_scan_point, jobs, chunksize=max(1, len(jobs) // (4 * cfg["workers"]))))
    else:
        rows = [_scan_point(j) for j in jobs]
    header = ["gamma", "r", "r_star", "admissible", "delta_dis", "ns_ok"]
    header += [f"aux{k}" for k in range(1, 8)] + [f"aux{k}_holds" for k in range(1, 8)] + ["aux_all_hold"]
    if cfg["with_profiles"]:
        header += ["eta_radial", "eta_angular", "eta_integrated", "certified"]
    header += ["error"]
    table = [[row.get(h, "") for h in header] for row in rows]
    adm = [row for row in rows if row["admissible"]]
    violations = [(row["gamma"], row["r"]) for row in adm if not row.get("aux_all_hold", False)]
    summary = {"points": len(rows), "admissible": len(adm), "inadmissible": len(rows) - len(adm),
               "violations": len(violations), "violation_points": violations,
               "errors": sum(1 for row in rows if row["error"])}
    if cfg["with_profiles"]:
        summary["not_certified"] = sum(1 for row in adm if row.get("certified") is False)
    return {"scan.csv": csv_text(header, table)}, {"summary": summary}


# --- portrait ------------------------------------------------------------------

def _contours(f, wlim, zlim, n):
    import contourpy

    W, Z = np.meshgrid(np.linspace(*wlim, n), np.linspace(*zlim, n))
    gen = contourpy.contour_generator(W, Z, f(W, Z), line_type=contourpy.LineType.Separate)
    return [np.asarray(seg) for seg in gen.lines(0.0) if len(seg) > 1]


def _clip(W, Z, wlim, zlim):
    inside = (W >= wlim[0]) & (W <= wlim[1]) & (Z >= zlim[0]) & (Z <= zlim[1])
    segs, cur = [], []
    for w, z, ok in zip(W, Z, inside):
        if ok:
            cur.append((w, z))
        elif cur:
            segs.append(np.array(cur))
            cur = []
    if cur:
        segs.append(np.array(cur))
    return [s for s in segs if len(s) > 1]


def portrait_curves(params: FluidParams, prof, n: int = 400):
    """Curves (id -> list of (k, 2) segments), points and the plotting window."""
    from .repulsivity_verifier import barrier_curve_b, xi1, xi2

    try:
        sd = sonic_data(params)
    except NegativeRadicand:
        # no sonic points (r beyond the admissible window): polynomial curves only
        sd = None
    ps = 2.0 * params.r / (3.0 * params.gamma - 1.0)
    p_star = ((SQRT3 - 1.0) * ps, -(1.0 + SQRT3) * ps)
    if sd is not None:
        pts = {"P_s": (sd.P_s.W, sd.P_s.Z), "P_s_bar": (sd.P_s_bar.W, sd.P_s_bar.Z),
               "P_star": p_star, "P_0": (0.0, 0.0)}
    else:
        pts = {"P_star": p_star, "P_0": (0.0, 0.0), "box_lo": (-1.5, -3.5), "box_hi": (3.0, 1.0)}
    ws = [p[0] for p in pts.values()]
    zs = [p[1] for p in pts.values()]
    pad_w = 0.3 * (max(ws) - min(ws))
    pad_z = 0.3 * (max(zs) - min(zs))
    wlim = (min(ws) - pad_w, max(ws) + pad_w)
    zlim = (min(zs) - pad_z, max(zs) + pad_z)
    if sd is None:
        del pts["box_lo"], pts["box_hi"]

    def poly(k):
        return lambda W, Z: eval_phase_polynomials(W, Z, params)[k]

    curves = {
        "NW0": _contours(poly(0), wlim, zlim, n),
        "NZ0": _contours(poly(2), wlim, zlim, n),
        "DZ0": _contours(poly(3), wlim, zlim, n),
        "Xi1": _contours(lambda W, Z: xi1(W, Z, params), wlim, zlim, n),
        "Xi2": _contours(lambda W, Z: xi2(W, Z, params), wlim, zlim, n),
    }
    curves["trajectory"] = _clip(prof.W, prof.Z, wlim, zlim) if prof is not None else []
    if sd is None:
        curves["b"] = curves["quadrilateral-Q"] = curves["line-U-Psbar"] = []
        return curves, pts, wlim, zlim
    top = -2.0 * (params.r - 1.0) / (3.0 * (params.gamma - 1.0))
    bu = np.linspace(sd.P_s.U, top, 2001)[:-1]
    bs = barrier_curve_b(bu, params)
    curves["b"] = _clip(bu + bs, bu - bs, wlim, zlim)
    ub = sd.P_s_bar.U
    quad = np.array([pts["P_s_bar"], pts["P_s"], (sd.P_s.W, sd.P_s.W), (ub, ub), pts["P_s_bar"]])
    curves["quadrilateral-Q"] = [quad]
    curves["line-U-Psbar"] = [np.array([[2 * ub - zlim[0], zlim[0]], [2 * ub - zlim[1], zlim[1]]])]
    return curves, pts, wlim, zlim


COLORS = {"NW0": "#1f77b4", "NZ0": "#000000", "DZ0": "#d62728", "Xi1": "#8c564b", "Xi2": "#9467bd",
          "b": "#ff7f0e", "trajectory": "#2ca02c", "quadrilateral-Q": "#d62728", "line-U-Psbar": "#17becf"}
LABELS = {"NW0": "N_W = 0", "NZ0": "N_Z = 0", "DZ0": "D_Z = 0", "Xi1": "Xi_1 = 0", "Xi2": "Xi_2 = 0",
          "b": "barrier b", "trajectory": "profile (W, Z)", "quadrilateral-Q": "quadrilateral Q",
          "line-U-Psbar": "U = U(P_s_bar)"}


def render_svg(curves, pts, wlim, zlim, width: int = 800, height: int = 600, title: str = "") -> str:
    def xy(w, z):
        return ((w - wlim[0]) / (wlim[1] - wlim[0]) * width, height - (z - zlim[0]) / (zlim[1] - zlim[0]) * height)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<title>{title}</title>', f'<rect width="{width}" height="{height}" fill="white"/>']
    for cid, segs in curves.items():
        dash = ' stroke-dasharray="6,4"' if cid in ("quadrilateral-Q", "line-U-Psbar") else ""
        fill = ' fill="#d62728" fill-opacity="0.08"' if cid == "quadrilateral-Q" else ' fill="none"'
        out.append(f'<g id="{cid}" stroke="{COLORS[cid]}" stroke-width="1.5"{fill}{dash}>')
        out.append(f"<desc>{LABELS[cid]}</desc>")
        for seg in segs:
            path = " ".join("%.6f,%.6f" % xy(w, z) for w, z in seg)
            out.append(f'<polyline points="{path}"/>')
        if cid == "quadrilateral-Q" and segs:
            cx, cy = xy(*np.mean(segs[0][:-1], axis=0))
            out.append(f'<text x="{cx:.6f}" y="{cy:.6f}" font-size="14" fill="#d62728" stroke="none">Q</text>')
        out.append("</g>")
    out.append('<g id="points">')
    for pid, (w, z) in pts.items():
        x, y = xy(w, z)
        out.append(f'<circle id="{pid}" cx="{x:.6f}" cy="{y:.6f}" r="4" fill="black"/>')
        out.append(f'<text x="{x + 6:.6f}" y="{y - 6:.6f}" font-size="12">{pid}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_portrait(cfg) -> tuple[dict, dict]:
    notes = []
    if cfg["allow_inadmissible"]:
        params = FluidParams(cfg["gamma"], cfg["r"], cfg["nu"])
        if not admissibility(params).in_range_r:
            notes.append("r outside (1, r_star(gamma)): illustrative portrait")
        try:
            prof = _profile(cfg, params)
        except ImplosionError as exc:
            prof = None
            notes.append(f"no trajectory: {type(exc).__name__}: {exc}")
    else:
        params = _params(cfg)
        prof = _profile(cfg, params)
    curves, pts, wlim, zlim = portrait_curves(params, prof, cfg["portrait_n"])
    if "P_s" not in pts:
        notes.append("sonic points do not exist (R1^2 < 0): P_s, P_s_bar, b and Q omitted")
    files = {"portrait.svg": render_svg(curves, pts, wlim, zlim, cfg["svg_width"], cfg["svg_height"],
                                        f"gamma={params.gamma:.6g}, r={params.r:.6g}")}
    for cid, segs in curves.items():
        rows = [(k, w, z) for k, seg in enumerate(segs) for w, z in seg]
        files[f"curve_{cid}.csv"] = csv_text(["segment", "W", "Z"], rows)
    files["points.csv"] = csv_text(["id", "W", "Z"], [(k, w, z) for k, (w, z) in pts.items()])
    for n in notes:
        print(f"note: {n}", file=sys.stderr)
    return files, {"window": {"W": list(wlim), "Z": list(zlim)}, "notes": notes,
                   "segments": {cid: len(segs) for cid, segs in curves.items()}}


HANDLERS = {"profile": cmd_profile, "certify": cmd_certify, "spectrum": cmd_spectrum, "evolve": cmd_evolve,
            "scan": cmd_scan, "portrait": cmd_portrait}


def write_outputs(cfg, files: dict, results: dict) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for name in sorted(files):
        data = files[name].encode()
        (out / name).write_bytes(data)
        hashes[name] = hashlib.sha256(data).hexdigest()
    manifest = {"command": cfg["command"], "version": __version__,
                "config": {k: v for k, v in cfg.items() if k != "output_dir"},
                "input_hash": config_hash(cfg), "outputs": hashes, "results": results}
    (out / "manifest.json").write_text(dumps(manifest))
    return out


def run(argv=None) -> int:
    try:
        cfg = load_config(argv)
        files, results = HANDLERS[cfg["command"]](cfg)
        out = write_outputs(cfg, files, results)
    except ImplosionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return 4
    print(f"{cfg['command']}: wrote {len(files) + 1} files to {out}")
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
