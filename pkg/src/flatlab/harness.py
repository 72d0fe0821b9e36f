"""Sweeps along cone curves: frames, brackets, normalizers and kernel-regime invariants.

Two regimes share one row format. In the bracket regime (tiny d) only
log-space quantities are computed: frames, inclusion certificates, the
Kobayashi squeeze bracket and the scaling normalizers. In the kernel regime
(log d >= KERNEL_LOG_D_MIN) the numerical Hartogs engine also supplies
J, R, S and M^F at q(t). Columns that do not apply to a row are left empty.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from flatlab.bergman import closed_form_model, metric_report, product_targets
from flatlab.config import SweepConfig
from flatlab.errors import (
    ConvergenceError,
    FlatlabError,
    RegimeError,
    TruncationWarning,
)
from flatlab.frames import build_frame, build_region, certify_inclusions
from flatlab.geometry import HartogsFlat, decompose_vector
from flatlab.hartogs import build_kernel
from flatlab.kobayashi import kobayashi_product, squeeze_bracket

__all__ = [
    "COLUMNS",
    "KERNEL_LOG_D_MIN",
    "SweepResult",
    "parameter_for_depth",
    "run_sweep",
    "trend",
    "ladder_tightening",
    "write_csv",
    "summarize",
]

# the engine resolves Re z1 down to about 1e-10 (pole ladder and quadrature grading)
KERNEL_LOG_D_MIN = -21.0

# frozen column order of the sweep CSV
COLUMNS = [
    "row",
    "log_d",
    "t",
    "d",
    "dstar",
    "epsilon",
    "delta",
    "xi",
    "xi_N",
    "xi_T",
    "p2",
    "A",
    "d1eps",
    "d2eps",
    "dstar_over_d2eps",
    "phi_p2_over_d",
    "dphi_p2_over_d",
    "p2_over_dstar",
    "dstar_closed_form",
    "dstar_closed_form_ratio",
    "certified",
    "frac_inner",
    "frac_outer",
    "center",
    "MK_lower_ratio",
    "MK_upper_ratio",
    "loc_factor",
    "MK_contains_one",
    "kappa",
    "J",
    "J_ratio",
    "R_value",
    "S_value",
    "MF",
    "MF_ratio",
    "kernel_tail",
    "error",
]


def parameter_for_depth(domain: HartogsFlat, curve, log_d: float) -> float:
    """The curve parameter t with log d(t) = log_d."""
    if curve.schedule == "normal":
        return math.exp(log_d)

    def gap(s):
        return build_frame(domain, curve, math.exp(s)).log_d - log_d

    lo, hi = log_d - 1.0, log_d + 1.0
    for _ in range(40):
        if gap(lo) < 0 < gap(hi):
            break
        lo, hi = lo - 1.0, min(hi + 1.0, -1e-3)
    else:
        raise ConvergenceError(f"cannot bracket the curve parameter for log d = {log_d}")
    return math.exp(brentq(gap, lo, hi, xtol=1e-14, rtol=1e-15))


def _fmt_complex_vector(v):
    return " ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in v)


def _product_row(cfg: SweepConfig, log_d, eps, delta, xi):
    n = cfg.n
    z = np.zeros(n + 1, dtype=complex)
    rep = metric_report(closed_form_model(cfg.domain()), z, xi)
    tg = product_targets(n, xi)
    mk = kobayashi_product(xi)
    center = max(abs(xi[0]), float(np.linalg.norm(xi[1:])))
    return {
        "log_d": log_d,
        "epsilon": eps,
        "delta": delta,
        "xi_N": abs(xi[0]),
        "xi_T": float(np.linalg.norm(xi[1:])),
        "certified": True,
        "center": center,
        "MK_lower_ratio": mk / center,
        "MK_upper_ratio": mk / center,
        "MK_contains_one": mk == center,
        "kappa": rep.kappa,
        "J": rep.J,
        "J_ratio": rep.J / tg["J"],
        "R_value": rep.ricci,
        "S_value": rep.scalar,
        "MF": rep.MF,
        "MF_ratio": rep.MF
        / math.sqrt(2 * abs(xi[0]) ** 2 + (n + 1) * float(np.linalg.norm(xi[1:])) ** 2)
        / math.sqrt(n + 3),
    }


@dataclass
class _Context:
    cfg: SweepConfig
    domain: object
    curve: object
    frames: dict = field(default_factory=dict)
    kernel: object = None


def _hartogs_row(ctx: _Context, log_d, eps, delta, xi):
    cfg, dom = ctx.cfg, ctx.domain
    frame = ctx.frames[log_d]
    if isinstance(frame, Exception):
        raise frame
    n = cfg.n
    prof = dom.profile
    dec = decompose_vector(xi, frame.unit_normal)
    row = {
        "log_d": log_d,
        "t": frame.t,
        "d": frame.d,
        "dstar": frame.dstar,
        "epsilon": eps,
        "delta": delta,
        "xi_N": dec.norm_normal,
        "xi_T": dec.norm_tangent,
        "p2": frame.p2,
        "A": frame.A,
    }
    region = build_region(frame, eps)
    row["d1eps"] = region.d1eps
    row["d2eps"] = region.d2eps
    q = set(cfg.quantities)
    if "normalizers" in q:
        row["dstar_over_d2eps"] = frame.dstar / region.d2eps
        if frame.p2 > 0:
            s2 = frame.p2**2
            row["phi_p2_over_d"] = math.exp(float(prof.log_phi(s2)) - frame.log_d)
            lg, sg = prof.log_derivative(s2, 1)
            row["dphi_p2_over_d"] = sg * math.exp(lg - frame.log_d)
        else:
            row["phi_p2_over_d"] = 0.0
            row["dphi_p2_over_d"] = 0.0
        row["p2_over_dstar"] = frame.p2 / frame.dstar
        if cfg.curve_schedule == "normal":
            norm = math.sqrt(prof.log_inverse(math.log(frame.t)))
            row["dstar_closed_form"] = norm
            row["dstar_closed_form_ratio"] = frame.dstar / norm
    if "MK" in q:
        rep = certify_inclusions(region, delta, cfg.samples, cfg.seed)
        row["certified"] = rep.passed
        row["frac_inner"] = rep.frac_inner
        row["frac_outer"] = rep.frac_outer
        if not rep.passed:
            # no bracket without the inclusions; the diagnostics stay in the row
            row["error"] = (
                f"CertificationError: inclusions not certified "
                f"(inner {rep.frac_inner:.6g}, outer {rep.frac_outer:.6g})"
            )
        else:
            try:
                br = squeeze_bracket(frame, region, delta, xi, rep)
            except RegimeError as exc:
                # the localization bound is vacuous at this depth; keep the rest of the row
                row["error"] = f"RegimeError: {exc}"
            else:
                row["center"] = br.center
                row["MK_lower_ratio"] = br.lower_ratio
                row["MK_upper_ratio"] = br.upper_ratio
                row["loc_factor"] = br.factors["localization"]
                row["MK_contains_one"] = br.contains_one()
    if q & {"J", "R", "S", "MF", "kernel"}:
        if ctx.kernel is None or log_d < KERNEL_LOG_D_MIN:
            raise RegimeError(f"log d = {log_d} is outside the kernel regime")
        z = frame.q
        row["kernel_tail"] = ctx.kernel.tail_estimate(z)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            rep = metric_report(ctx.kernel.model(), z, xi)
        J_target = 2 * math.pi ** (n + 1) * (n + 1) ** n / math.factorial(n)
        row["kappa"] = rep.kappa
        row["J"] = rep.J
        row["J_ratio"] = rep.J / J_target
        row["R_value"] = rep.ricci
        row["S_value"] = rep.scalar
        row["MF"] = rep.MF
        scale = math.sqrt(
            dec.norm_normal**2 / (2 * frame.d**2) + (n + 1) * dec.norm_tangent**2 / frame.dstar**2
        )
        row["MF_ratio"] = rep.MF / scale / math.sqrt(n + 3)
    return row


def _safe(fn, *args):
    base = {"log_d": args[1], "epsilon": args[2], "delta": args[3]}
    try:
        return fn(*args)
    except (FlatlabError, ArithmeticError, ValueError) as exc:
        base["error"] = f"{type(exc).__name__}: {exc}"
        return base


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list
    summary: dict

    def csv_text(self) -> str:
        return write_csv(self.rows)


def _grid(cfg):
    return [
        (log_d, eps, delta, xi)
        for log_d in cfg.log_d
        for eps in cfg.epsilon
        for delta in cfg.delta
        for xi in cfg.xi_arrays()
    ]


def run_sweep(cfg: SweepConfig, write: bool = True) -> SweepResult:
    """One row per (log d, epsilon, delta, xi) in grid order.

    Rows are computed by a thread pool but collected in grid order, and every
    random choice is seeded from the config, so repeated runs give identical
    output. Failures are recorded in the row's error column.
    """
    grid = _grid(cfg)
    if cfg.domain_kind == "product":
        ctx = None
        results = [
            _safe(_product_row, cfg, *g) for g in grid
        ]
    else:
        domain = cfg.domain()
        curve = cfg.curve()
        ctx = _Context(cfg, domain, curve)
        for log_d in cfg.log_d:
            try:
                t = parameter_for_depth(domain, curve, log_d)
                ctx.frames[log_d] = build_frame(domain, curve, t)
            except (FlatlabError, ArithmeticError, ValueError) as exc:
                ctx.frames[log_d] = exc
        needs_kernel = set(cfg.quantities) & {"J", "R", "S", "MF", "kernel"}
        if needs_kernel and any(x >= KERNEL_LOG_D_MIN for x in cfg.log_d) and domain.n == 1:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                ctx.kernel = build_kernel(domain, cfg.engine)
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(lambda g: _safe(_hartogs_row, ctx, *g), grid))
        else:
            results = [_safe(_hartogs_row, ctx, *g) for g in grid]
    rows = []
    for i, (g, r) in enumerate(zip(grid, results)):
        full = {c: None for c in COLUMNS}
        full.update(r)
        full["row"] = i
        full["xi"] = _fmt_complex_vector(g[3])
        rows.append(full)
    summary = summarize(cfg, rows)
    if ctx is not None and ctx.kernel is not None:
        summary["engine"] = {k: v for k, v in ctx.kernel.diagnostics.items()}
    result = SweepResult(cfg, rows, summary)
    if write:
        if cfg.csv_path:
            Path(cfg.csv_path).parent.mkdir(parents=True, exist_ok=True)
            with open(cfg.csv_path, "w", newline="") as fh:
                fh.write(result.csv_text())
        if cfg.json_path:
            Path(cfg.json_path).parent.mkdir(parents=True, exist_ok=True)
            with open(cfg.json_path, "w") as fh:
                json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
                fh.write("\n")
    return result


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(rows) -> str:
    """CSV text with the frozen column order, 17 significant digits and unix newlines."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def trend(values, target, band: float = 0.02) -> dict:
    """Drift of the last three values relative to a target.

    ``toward`` holds when the distance to the target is nonincreasing over
    the last three points; ``in_band`` when their spread is within ``band``
    relative to the target (or absolute when the target is 0).
    """
    vals = [v for v in values if v is not None and math.isfinite(v)]
    if len(vals) < 3:
        return {"last3": vals, "toward": None, "in_band": None, "ok": None}
    last = vals[-3:]
    dist = [abs(v - target) for v in last]
    toward = dist[0] >= dist[1] >= dist[2]
    scale = abs(target) if target else 1.0
    in_band = (max(last) - min(last)) / scale <= band
    return {"last3": last, "toward": bool(toward), "in_band": bool(in_band), "ok": bool(toward or in_band)}


def ladder_tightening(cfg: SweepConfig, rows):
    """Check that the bracket-to-center interval never widens along the configured ladder.

    The ladder lists (epsilon, delta, log d) rungs in the order in which both
    parameters shrink and d is pushed smaller. Returns None without a ladder.
    """
    if not cfg.ladder:
        return None
    index = {}
    for r in rows:
        index[(r["epsilon"], r["delta"], r["log_d"], r["xi"])] = r
    ok = True
    for xi in {r["xi"] for r in rows}:
        prev = None
        for eps, delta, log_d in cfg.ladder:
            r = index.get((eps, delta, log_d, xi))
            if r is None or r.get("MK_lower_ratio") is None:
                return False
            if prev is not None:
                if r["MK_lower_ratio"] < prev["MK_lower_ratio"] - 1e-12:
                    ok = False
                if r["MK_upper_ratio"] > prev["MK_upper_ratio"] + 1e-12:
                    ok = False
            prev = r
    return ok


def summarize(cfg: SweepConfig, rows) -> dict:
    n = cfg.n
    targets = {"J_ratio": 1.0, "MF_ratio": 1.0, "R_value": -1.0, "S_value": -(n + 1.0)}
    series = {}
    for r in rows:
        key = f"eps={r['epsilon']:g},delta={r['delta']:g},xi={r['xi']}"
        series.setdefault(key, []).append(r)
    trends = {}
    for key, grp in series.items():
        grp = sorted(grp, key=lambda r: -r["log_d"])
        trends[key] = {
            q: trend([r.get(q) for r in grp], tgt)
            for q, tgt in targets.items()
            if any(r.get(q) is not None for r in grp)
        }
    certified = [r for r in rows if r.get("certified")]
    contained = [r.get("MK_contains_one") for r in certified if r.get("MK_contains_one") is not None]
    return {
        "name": cfg.name,
        "config": _config_echo(cfg),
        "rows": len(rows),
        "errors": sum(1 for r in rows if r.get("error")),
        "certified_rows": len(certified),
        "bracket_contains_one": all(contained) if contained else None,
        "ladder_tightening": ladder_tightening(cfg, rows),
        "trends": trends,
    }


def _config_echo(cfg: SweepConfig) -> dict:
    d = asdict(cfg)
    d["direction"] = [str(z) for z in cfg.direction]
    d["xi"] = [[str(z) for z in v] for v in cfg.xi]
    return d
