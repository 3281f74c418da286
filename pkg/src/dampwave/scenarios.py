"""Named experiments binding the numerical modules into gated checks.

Each scenario takes a nested config dict (merged over its defaults), runs,
and returns a :class:`ScenarioResult` holding pass/fail checks and the
tables that the CLI writes as CSV.  Operators and step matrices are cached
per configuration so scenarios sharing an operator pay for it once.
"""

from __future__ import annotations

import copy
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Optional

import numpy as np

from . import contour as ct
from . import gcc
from . import heat_profile as hp
from . import resolvent as rs
from .damped_wave import (
    BlockGenerator,
    CauchyData,
    PropagationBlowUp,
    operator_norm_growth,
    propagate,
    propagate_states,
    propagator_growth_bound,
    trajectory_table,
)
from .fields import Constant, Hole, Lens, make_field
from .operators import (
    DampingOperator,
    apply_spectral_function,
    step_cutoff,
    Grid,
    build_divergence_form,
    build_tilde_A,
    discrete_norm,
)
from .rates import (
    TimeSeries,
    certify_bound,
    fit_loglog,
    gap_respecting_window,
    tail_trend_to_zero,
)


# --------------------------------------------------------------------------
# results


@dataclass
class Check:
    id: str
    claim: str
    value: float
    threshold: str
    passed: bool
    gated: bool = True

    def as_dict(self):
        return {
            "id": self.id,
            "paper_ref": self.claim,
            "value": self.value,
            "threshold": self.threshold,
            "pass": bool(self.passed),
            "gated": self.gated,
        }


@dataclass
class ScenarioResult:
    scenario: str
    config: Dict
    checks: List[Check] = field(default_factory=list)
    tables: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)
    footers: Dict[str, str] = field(default_factory=dict)
    log: List[str] = field(default_factory=list)
    elapsed: float = 0.0

    def add(self, id, claim, value, threshold, passed, gated=True):
        self.checks.append(Check(id, claim, _num(value), threshold, bool(passed), gated))

    def note(self, msg: str):
        self.log.append(msg)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gated)

    def failed(self) -> List[Check]:
        return [c for c in self.checks if c.gated and not c.passed]


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    try:
        return float(v)
    except (TypeError, ValueError):
        return v


class Context:
    """Execution options shared by a scenario's sub-tasks."""

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))

    def map(self, fn: Callable, items):
        items = list(items)
        if self.workers == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.workers) as pool:
            return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# shared problem setup


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) so streams are reproducible by seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def make_grid(cfg: Dict) -> Grid:
    return Grid(int(cfg["dim"]), int(cfg["points"]), float(cfg["length"]), cfg.get("boundary", "periodic"))


class Problem:
    """Grid, stiffness ``A``, damping ``B`` and lazily built derived objects."""

    def __init__(self, grid: Grid, g_spec, a_spec, indefinite: bool = False):
        self.grid = grid
        self.A = build_divergence_form(grid, make_field(g_spec))
        self.B = DampingOperator(make_field(a_spec)(grid.points()), indefinite=indefinite)

    @cached_property
    def gen(self) -> BlockGenerator:
        return BlockGenerator(self.A, self.B)

    @cached_property
    def tilde(self):
        return build_tilde_A(self.A, self.B)


@lru_cache(maxsize=8)
def _problem(key: str) -> Problem:
    cfg = json.loads(key)
    return Problem(make_grid(cfg["grid"]), cfg["g"], cfg["a"], cfg.get("indefinite", False))


def get_problem(cfg: Dict) -> Problem:
    key = json.dumps({k: cfg[k] for k in ("grid", "g", "a")} | {"indefinite": cfg.get("indefinite", False)}, sort_keys=True)
    return _problem(key)


def bump(points: np.ndarray, amplitude=1.0, width=1.0, center=0.0) -> np.ndarray:
    c = np.zeros(points.shape[1])
    c[:] = center if np.isscalar(center) else np.asarray(center, dtype=float)[: points.shape[1]]
    return amplitude * np.exp(-((points - c) ** 2).sum(axis=1) / width**2)


def make_data(grid: Grid, spec: Dict) -> CauchyData:
    """``{"preset": "gaussian", "u0": {...} | None, "u1": {...} | None}`` or
    ``{"preset": "delta"}`` (unit mass in the cell nearest the origin)."""
    pts = grid.points()
    kind = spec.get("preset", "gaussian")
    if kind == "gaussian":
        parts = [bump(pts, **spec[k]) if spec.get(k) else np.zeros(grid.size) for k in ("u0", "u1")]
        return CauchyData(parts[0], parts[1], json.dumps(spec, sort_keys=True))
    if kind == "delta":
        u0 = np.zeros(grid.size)
        u0[np.argmin((pts**2).sum(axis=1))] = 1.0 / grid.cell_volume
        return CauchyData(u0, np.zeros(grid.size), "delta")
    raise ValueError(f"unknown data preset {kind!r}")


def random_bump_data(grid: Grid, draws: int, seed: int, bumps: int = 3, widths=(2.0, 10.0), spread: float = 50.0):
    """Grid-independent random data: sums of Gaussian bumps with random
    centres, widths and signed amplitudes, for both ``u0`` and ``u1``."""
    rng = make_rng(seed)
    pts = grid.points()
    out = []
    for _ in range(draws):
        parts = []
        for _ in range(2):
            u = np.zeros(grid.size)
            for _ in range(bumps):
                c = rng.uniform(-spread, spread, size=grid.dim)
                w = rng.uniform(*widths)
                a = rng.standard_normal()
                u += bump(pts, a, w, c)
            parts.append(u)
        out.append(CauchyData(parts[0], parts[1], f"random_bumps seed={seed}"))
    return out


def energy_norms(states: np.ndarray, A, grid: Grid):
    """``H0`` and ``H`` norms of stacked states (columns or rows of 2n)."""
    n = A.n
    z = states if states.shape[0] == 2 * n else states.T
    u, v = z[:n], z[n:]
    w = grid.cell_volume
    h0 = w * (np.maximum(np.einsum("ik,ij,jk->k", u, A.matrix, u), 0.0) + (v**2).sum(0))
    return np.sqrt(h0), np.sqrt(h0 + w * (u**2).sum(0))


def time_grid(cfg: Dict) -> np.ndarray:
    kind = cfg.get("kind", "geometric")
    if kind == "geometric":
        t = np.geomspace(cfg["t_min"], cfg["t_max"], int(cfg["count"]))
    elif kind == "uniform":
        t = np.arange(cfg["t_min"], cfg["t_max"] + 0.5 * cfg["step"], cfg["step"])
    else:
        raise ValueError(f"unknown time grid {kind!r}")
    dt = cfg.get("dt")
    if dt:
        t = np.unique(np.maximum(np.rint(t / dt), 1) * dt)
    return t


MAIN_PROBLEM = {
    "grid": {"dim": 1, "points": 2048, "length": 400.0, "boundary": "periodic"},
    "g": 1.0,
    "a": {"preset": "sine", "base": 1.0, "amplitude": 0.5, "period": 400.0},
}
MAIN_DATA = {
    "preset": "gaussian",
    "u0": {"amplitude": 1.0, "width": 5.0, "center": 0.0},
    "u1": {"amplitude": 0.5, "width": 4.0, "center": 3.0},
}
MAIN_TIMES = {"kind": "geometric", "t_min": 10.0, "t_max": 200.0, "count": 40, "dt": 0.5}


# --------------------------------------------------------------------------
# scenarios


def run_identities(cfg: Dict, ctx: Context, res: ScenarioResult):
    rng = make_rng(cfg["seed"])
    c = cfg["c"]
    instances = []
    for _ in range(cfg["instances"]):
        n = int(rng.integers(2, cfg["max_size"] + 1))
        m = rng.standard_normal((n, n))
        a = m @ m.T / n + 0.05 * np.eye(n)
        b = rng.uniform(c, 10.0, n)
        lam = complex(rng.uniform(-0.25 * c, 1.0), rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 2.0))
        instances.append((a, b, lam))

    def one(inst):
        a, b, lam = inst
        _, blk = rs.block_resolvent(a, b, lam)
        ids = rs.verify_heat_splitting(a, b, lam)
        B = DampingOperator(b)
        At = build_tilde_A(a, B)
        lam_t = At.spectrum.eigenvalues
        eps = float(np.median(lam_t))
        phi = hp.cutoff_projector(At, B, eps)
        sc = max(np.abs(phi).max(), 1.0)
        idem = np.abs(phi @ phi - phi).max() / sc
        adj_ref = (b**0.5)[:, None] * apply_spectral_function(At, step_cutoff(eps)) * (b**-0.5)[None, :]
        adj = np.abs(phi.T - adj_ref).max() / sc
        cauchy = rs.cauchy_integral_check(a, b, 1.0 + 1.0j, 0.5)
        return blk, ids.splitting, ids.conjugation, ids.commutation, ids.adjoint, idem, adj, cauchy

    out = np.array(ctx.map(one, instances))
    names = [
        ("block_resolvent", "block resolvent identity"),
        ("splitting", "heat splitting identity"),
        ("linear_conjugation", "(B lam + A)^-1 via conjugated At"),
        ("commutation", "R(lam) commutes with (B lam + A)^-1"),
        ("adjoint", "R(lam)* = R(conj lam)"),
        ("cutoff_idempotent", "phi_B(A) idempotent"),
        ("cutoff_adjoint", "phi_B(A) adjoint formula"),
    ]
    tol = cfg["tolerance"]
    for k, (cid, claim) in enumerate(names):
        v = out[:, k].max()
        res.add(cid, claim, v, f"<= {tol:g}", v <= tol)
    res.add("cauchy_integral", "resolvent analytic (Cauchy integral reproduces centre)", out[:, 7].max(), "<= 1e-8", out[:, 7].max() <= 1e-8)
    blk, _ = rs.block_resolvent(1.0, 1.0, 1.0)
    ref = np.array([[2, 1], [-1, 1]]) / 3
    res.add("scalar_block", "scalar block resolvent A=B=lam=1", np.abs(blk - ref).max(), "<= 1e-14", np.abs(blk - ref).max() <= 1e-14)
    res.tables["identities"] = {
        "instance": np.arange(len(instances)),
        "size": np.array([i[0].shape[0] for i in instances]),
        **{cid: out[:, k] for k, (cid, _) in enumerate(names)},
    }


LEMMA_INSTANCES = [
    {"g": 1.0, "a": 1.0},
    {"g": 1.0, "a": {"preset": "sine", "base": 1.0, "amplitude": 0.5, "period": 6.0}},
    {"g": {"preset": "sine", "base": 1.0, "amplitude": 0.3, "period": 3.0}, "a": {"preset": "gaussian", "base": 0.5, "amplitude": 2.0, "width": 1.0}},
    {"g": {"preset": "gaussian", "base": 1.0, "amplitude": 1.0, "width": 0.7}, "a": 2.0},
    {"g": {"preset": "sine", "base": 2.0, "amplitude": 1.0, "period": 6.0}, "a": {"preset": "hole", "r_inner": 0.5, "r_outer": 1.5, "inner": 0.3, "outer": 1.5}},
]


def run_lemma_surveys(cfg: Dict, ctx: Context, res: ScenarioResult):
    gcfg = cfg["grid"]
    s, q = cfg["strip"], cfg["sector"]
    bo = cfg["big_o"]

    def problem(inst, refine):
        gd = dict(gcfg, points=gcfg["points"] * refine)
        grid = Grid(1, gd["points"], gd["length"], "dirichlet")
        A = build_divergence_form(grid, make_field(inst["g"]))
        b = make_field(inst["a"])(grid.points())
        return A, b

    def explicit(idx):
        A, b = problem(cfg["instances"][idx], 1)
        c = b.min()
        strip = rs.LambdaGrid.strip(1.0, s["im_lo"], s["im_hi"], s["n_re"], s["n_im"], re_min=-s["re_frac"] * c)
        sector = rs.LambdaGrid.sector(q["r_lo"], q["r_hi"], q["n_r"], q["n_angle"])
        return rs.survey_lemma_bounds(A, b, strip, "strip_bound"), rs.survey_lemma_bounds(A, b, sector, "sector_bound")

    def big_o(job):
        idx, lemma = job
        out = []
        for refine in (1, 2):
            A, b = problem(cfg["instances"][idx], refine)
            grid = rs.LambdaGrid.strip(
                bo["re_max"], bo["im_lo"], bo["im_hi"], bo["n_re"] * refine - (refine - 1), bo["n_im"] * refine
            )
            out.append(rs.survey_lemma_bounds(A, b, grid, lemma))
        return out

    surveys = ctx.map(explicit, range(len(cfg["instances"])))
    worst = {"strip_bound": np.inf, "sector_bound": np.inf}
    tables = {k: [] for k in ("lemma_id", "re_lambda", "im_lambda", "measured", "bound", "margin")}
    for pair in surveys:
        for sv in pair:
            worst[sv.lemma] = min(worst[sv.lemma], sv.min_margin)
            for k, v in sv.table().items():
                tables[k].append(v)
    npts = min(len(p[0].lam) for p in surveys)
    res.add("strip_bound", "strip resolvent bound 1/(|Im|(c+2Re))", worst["strip_bound"], f">= 1 (min margin, {npts} pts x {len(surveys)} ops)", worst["strip_bound"] >= 1)
    res.add("sector_bound", "sector resolvent bound 1/(c Re)", worst["sector_bound"], ">= 1 (min margin)", worst["sector_bound"] >= 1)
    jobs = [(i, lem) for lem in rs.BIG_O_LEMMAS for i in range(len(cfg["instances"]))]
    outs = ctx.map(big_o, jobs)
    drift_tol = cfg["drift"]
    per_lemma: Dict[str, List[float]] = {}
    for (i, lem), (coarse, fine) in zip(jobs, outs):
        per_lemma.setdefault(lem, []).append(rs.refinement_drift(coarse, fine))
        for k, v in fine.table().items():
            tables[k].append(v)
    claims = {
        "h_to_h1": "H -> H1 resolvent big-O",
        "h1_to_h1": "H1 -> H1 resolvent big-O",
        "energy_h0_h0": "energy space H0 -> H0 big-O",
        "energy_h_h0": "energy space H -> H0 big-O",
        "energy_h_h": "energy space H -> H big-O",
    }
    for lem, drifts in per_lemma.items():
        d = max(drifts)
        res.add(f"{lem}_drift", claims[lem], d, f"<= {drift_tol:g} (refinement drift)", d <= drift_tol)
    res.tables["survey"] = {k: np.concatenate(v) for k, v in tables.items()}


def _main_run(cfg: Dict, res: ScenarioResult):
    prob = get_problem(cfg["problem"])
    data = make_data(prob.grid, cfg["data"])
    t = time_grid(cfg["times"])
    traj = propagate(prob.gen, data, t, dt=cfg["times"].get("dt"))
    prof = hp.profile_v(prob.A, prob.B, data, traj.times, tilde_A=prob.tilde)
    return prob, data, traj, prof


def run_thm11(cfg: Dict, ctx: Context, res: ScenarioResult):
    prob, data, traj, prof = _main_run(cfg, res)
    scale = hp.data_scale(data, prob.A, prob.grid, "H")
    diff = hp.profile_difference(traj, prof, prob.grid, scale)
    win = tuple(cfg["fit_window"])
    fit = fit_loglog(diff, win)
    trend = tail_trend_to_zero(diff, 1.0, win)
    cert = certify_bound(diff.normalized(), 1.0, "none", win)
    res.add("diff_slope", "profile difference rate t^-1", fit.slope, f"<= {cfg['max_slope']:g}", fit.slope <= cfg["max_slope"])
    res.add("t_diff_to_zero", "t * difference tends to zero for fixed data", trend.max_relative_rise, "t*diff strictly decreasing on last half", trend.decreasing)
    res.add("t_diff_bounded", "sup t * normalized difference finite", cert.sup_value, "certificate stabilizes (20%)", cert.holds)
    res.tables["profile"] = hp.difference_table(diff, 1.0)
    res.tables["trajectory"] = trajectory_table(traj, prob.A, prob.grid)
    res.footers["profile"] = f"slope={fit.slope:.4f} window={fit.window} sup={cert.sup_value:.4g}"


def run_thm12(cfg: Dict, ctx: Context, res: ScenarioResult):
    prob, data, traj, prof = _main_run(cfg, res)
    At = prob.tilde
    lam1 = At.spectrum.eigenvalues[1]
    win = gap_respecting_window(cfg["times"]["t_min"], cfg["times"]["t_max"], lam1)
    res.note(f"gap-respecting window {win}, lambda1={lam1:.4g}")
    ts = np.geomspace(win[0], win[1], cfg["norm_samples"])
    l12 = np.array([hp.semigroup_operator_norm(At, t, "L1->L2") for t in ts])
    fit = fit_loglog(TimeSeries(ts, l12, "L1->L2"))
    m = -fit.slope
    ok = abs(fit.slope + 0.25) <= 0.05
    res.add("l1l2_slope", "heat semigroup L1 -> L2 decay t^-d/4", fit.slope, "-0.25 +- 0.05", ok)
    scale = hp.data_scale(data, prob.A, prob.grid, "L1L2")
    diff = hp.profile_difference(traj, prof, prob.grid, scale)
    cert = certify_bound(diff.normalized(), 1 + m, "none", win)
    res.add("measured_m_certificate", "difference O(t^-(1+m)) for L1 data", cert.sup_value, f"p=1+m={1 + m:.4f}; stabilizes (20%)", cert.holds)
    res.tables["profile"] = hp.difference_table(diff.window(win), 1 + m)
    res.tables["l1l2"] = {"t": ts, "norm_L1_L2": l12}


def run_individual(cfg: Dict, ctx: Context, res: ScenarioResult):
    prob, data, traj, prof = _main_run(cfg, res)
    diff = hp.profile_difference(traj, prof, prob.grid, hp.data_scale(data, prob.A, prob.grid))
    lam1 = prob.tilde.spectrum.eigenvalues[1]
    win = gap_respecting_window(cfg["window_min"], cfg["times"]["t_max"], lam1)
    trend = tail_trend_to_zero(diff, 1.0, win)
    fit = fit_loglog(diff, win)
    res.add("t_diff_to_zero", "lim t * difference = 0 for fixed data", trend.max_relative_rise, "strictly decreasing on last half", trend.decreasing)
    res.add("diff_slope_below_one", "difference faster than t^-1", fit.slope, "< -1", fit.slope < -1)
    res.tables["profile"] = hp.difference_table(diff, 1.0)


def run_energy_decay(cfg: Dict, ctx: Context, res: ScenarioResult):
    win = tuple(cfg["window"])
    t = time_grid(cfg["times"])
    consts = {}
    for pts in cfg["refinement_points"]:
        pcfg = copy.deepcopy(cfg["problem"])
        pcfg["grid"]["points"] = pts
        prob = get_problem(pcfg)
        draws = random_bump_data(prob.grid, cfg["draws"], cfg["seed"], spread=cfg["spread"])
        z0 = np.stack([d.state for d in draws], axis=1)
        _, fh = energy_norms(z0, prob.A, prob.grid)
        z0 = z0 / fh
        ts, states, _ = propagate_states(prob.gen, z0, t, cfg["times"].get("dt"))
        sup = np.array([energy_norms(s, prob.A, prob.grid)[0].max() for s in states])
        cert = certify_bound(TimeSeries(ts, sup, "energy0"), 0.5, "none", win)
        consts[pts] = cert
        if pts == max(cfg["refinement_points"]):
            growth = propagator_growth_bound(prob.gen, z0, t, cfg["times"].get("dt"))
            res.add("h0_contraction", "U(t) contraction on H0", growth.h0_contraction, "<= 1 + 1e-8", growth.h0_contraction <= 1 + 1e-8)
            res.add("growth_constant", "||U(t)||_H <= C (1 + t)", growth.constant, "finite", np.isfinite(growth.constant))
            res.tables["energy_sup"] = {"t": ts, "sup_energy0": sup, "running_sup": cert.running_sup}
    lo, hi = min(consts), max(consts)
    drift = abs(consts[hi].sup_value - consts[lo].sup_value) / consts[hi].sup_value
    res.add("energy_certificate", "energy decay t^-1/2 for H data", consts[hi].sup_value, "finite and stabilizes", consts[hi].finite and consts[hi].holds)
    res.add("energy_refinement_drift", "energy certificate grid independent", drift, f"<= {cfg['max_drift']:g}", drift <= cfg["max_drift"])
    prob = get_problem(cfg["problem"])
    data = make_data(prob.grid, cfg["localized_data"])
    traj = propagate(prob.gen, data, t, dt=cfg["times"].get("dt"))
    e0 = energy_norms(traj.states.T, prob.A, prob.grid)[0]
    fit = fit_loglog(TimeSeries(traj.times, e0, "energy0"), tuple(cfg["slope_window"]))
    res.add("localized_energy_slope", "energy decay for localized L1 data", fit.slope, f"<= {cfg['max_slope']:g}", fit.slope <= cfg["max_slope"])
    res.tables["trajectory"] = trajectory_table(traj, prob.A, prob.grid)


def run_highfreq(cfg: Dict, ctx: Context, res: ScenarioResult):
    prob, data, traj, _ = _main_run(cfg, res)
    dn = discrete_norm(data.state, "energyH", prob.grid, prob.A)
    rep = hp.highfreq_cutoff_decay(prob.A, prob.B, traj, cfg["eps"], dn, tilde_A=prob.tilde)
    cert = rep.certificate
    after = cert.times >= cfg["decreasing_after"]
    w = cert.weighted[after]
    decreasing = bool(np.all(np.diff(w) < 0)) and cert.argsup <= cfg["decreasing_after"]
    res.add("t2_certificate", "high-frequency part O(t^-2)", cert.sup_value, "finite", cert.finite)
    res.add("t2_decreasing", "t^2 * high-frequency part decreasing", cert.argsup, f"argsup <= {cfg['decreasing_after']:g} and decreasing after", decreasing)
    res.add("cutoff_idempotent", "phi_B(A)^2 = phi_B(A)", rep.idempotence_residual, "<= 1e-10", rep.idempotence_residual <= 1e-10)
    res.add("cutoff_adjoint", "phi_B(A)* = B^1/2 phi(At) B^-1/2", rep.adjoint_residual, "<= 1e-10", rep.adjoint_residual <= 1e-10)
    res.tables["highfreq"] = {"t": cert.times, "normalized": rep.series.values, "t2_weighted": cert.weighted, "running_sup": cert.running_sup}


def run_optimality(cfg: Dict, ctx: Context, res: ScenarioResult):
    prob = get_problem(cfg["problem"])
    At = prob.tilde
    lam, q = At.spectrum.eigenvalues, At.spectrum.eigenvectors
    sb = prob.B.diagonal**0.5

    def one(a):
        k = int(np.argmin(np.abs(lam - a)))
        u1 = sb * q[:, k]
        data = CauchyData(np.zeros_like(u1), u1, f"spectral a={a}")
        t = 1.0 / a
        traj = propagate(prob.gen, data, [t], dt=t / cfg["steps"])
        prof = hp.profile_v(prob.A, prob.B, data, traj.times, tilde_A=At)
        d = hp.profile_difference(traj, prof, prob.grid).values[0]
        ratio = t * d / discrete_norm(u1, "L2", prob.grid)
        val = ct.residue_check_optimality(a, t)
        return a, float(lam[k]), ratio, (t * val).real, abs(val - ct.residue_closed_form(a, t))

    rows = ctx.map(one, cfg["a_values"])
    for a, eig, ratio, tv, err in rows:
        res.add(f"lower_bound_a{a:g}", "t * difference bounded below at t = 1/a", ratio, f">= {cfg['min_ratio']:g}", ratio >= cfg["min_ratio"])
        res.add(f"residue_a{a:g}", "residue 2a e^-at - a^2 t e^-at", tv, "e^-1 +- 1e-4", abs(tv - np.exp(-1)) <= 1e-4)
    res.tables["optimality"] = {k: np.array(v) for k, v in zip(("a", "eigenvalue", "t_diff_ratio", "t_residue", "residue_error"), zip(*rows))}


def _heat_checks(res: ScenarioResult, cfg: Dict, tag: str, slope_target: float, slope_tol: float):
    grid = make_grid(cfg["grid"])
    P = build_divergence_form(grid, make_field(cfg.get("g", 1.0)))
    pts = grid.points()
    c_var = DampingOperator(make_field(cfg["c"])(pts))
    c_one = DampingOperator(np.ones(grid.size))
    Pt_var = build_tilde_A(P, c_var)
    Pt_one = build_tilde_A(P, c_one)
    tn = np.geomspace(*cfg["norm_times"])
    root = c_var.diagonal**0.5
    l11_one = np.array([hp.semigroup_operator_norm(Pt_one, t, "L1->L1") for t in tn])
    l11_w = np.array([hp.semigroup_operator_norm(Pt_var, t, "weighted L1->L1", weight=root) for t in tn])
    l11_var = np.array([hp.semigroup_operator_norm(Pt_var, t, "L1->L1") for t in tn])
    equiv = np.sqrt(c_var.diagonal.max() / c_var.diagonal.min())
    res.add(f"{tag}_l1l1", "L1 -> L1 bound (constant c)", l11_one.max(), "<= 1 + 1e-8", l11_one.max() <= 1 + 1e-8)
    res.add(f"{tag}_l1l1_weighted", "c^1/2-weighted L1 contraction", l11_w.max(), "<= 1 + 1e-8", l11_w.max() <= 1 + 1e-8)
    res.add(f"{tag}_l1l1_variable", "L1 -> L1 uniformly bounded (variable c)", l11_var.max(), f"<= sqrt(max c / min c) = {equiv:.4f}", l11_var.max() <= equiv * (1 + 1e-8))
    delta = make_data(grid, {"preset": "delta"}).u0
    gauss = bump(pts, 1.0, cfg["bump_width"], 0.0)
    tt = np.geomspace(*cfg["heat_times"])
    rep_d = hp.nash_and_conservation_checks(Pt_var, c_var, delta, tt)
    rep_g = hp.nash_and_conservation_checks(Pt_var, c_var, gauss, tt)
    res.add(f"{tag}_positivity", "heat semigroup positivity", min(rep_d.min_value, rep_g.min_value), ">= -1e-10", min(rep_d.min_value, rep_g.min_value) >= -1e-10)
    drift = max(rep_d.heat_drift, rep_g.heat_drift)
    res.add(f"{tag}_heat_drift", "modified total heat int c^1/2 u conserved", drift, "<= 1e-8", drift <= 1e-8)
    rise = max(rep_d.quotient_max_rise, rep_g.quotient_max_rise)
    res.add(f"{tag}_nash_quotient", "Nash quotient nonincreasing", rise, "<= 1e-12", rise <= 1e-12)
    ts = np.geomspace(*cfg["slope_times"])
    l12 = np.array([hp.semigroup_operator_norm(Pt_var, t, "L1->L2") for t in ts])
    fit = fit_loglog(TimeSeries(ts, l12, "L1->L2"))
    res.add(f"{tag}_l1l2_slope", "L1 -> L2 decay t^-d/4", fit.slope, f"{slope_target:g} +- {slope_tol:g}", abs(fit.slope - slope_target) <= slope_tol)
    res.tables[f"{tag}_norms"] = {"t": tn, "L1_L1_const_c": l11_one, "L1_L1_weighted": l11_w, "L1_L1_variable_c": l11_var}
    res.tables[f"{tag}_l1l2"] = {"t": ts, "L1_L2": l12}
    res.tables[f"{tag}_nash"] = {"t": tt, "H_delta": rep_d.nash_quotient, "H_gauss": rep_g.nash_quotient}
    return grid, P, c_var


def _nash_stability(res: ScenarioResult, cfg: Dict, tag: str):
    values = []
    for pts in cfg["nash_points"]:
        gcfg = dict(cfg["grid"], points=pts)
        grid = make_grid(gcfg)
        P = build_divergence_form(grid, make_field(cfg.get("g", 1.0)))
        c = DampingOperator(make_field(cfg["c"])(grid.points()))
        Pt = build_tilde_A(P, c)
        rng = make_rng(cfg["seed"])
        x = grid.points()
        cols = []
        for _ in range(cfg["nash_draws"]):
            u = np.zeros(grid.size)
            for _ in range(2):
                u += bump(x, rng.uniform(0.2, 1.0), rng.uniform(*cfg["nash_widths"]), rng.uniform(-5, 5, grid.dim))
            cols.append(u)
        values.append(hp.nash_constant(Pt, c.diagonal**0.5, np.stack(cols, axis=1)))
    drift = abs(values[-1] - values[0]) / values[-1]
    res.add(f"{tag}_nash_constant", "discrete Nash inequality, grid-stable constant", drift, "<= 0.2 (refinement drift)", drift <= 0.2 and np.all(np.isfinite(values)))
    res.note(f"{tag} Nash constants {values}")


def run_heat_1d(cfg: Dict, ctx: Context, res: ScenarioResult):
    _heat_checks(res, cfg, "d1", -0.25, 0.05)
    grid = make_grid(cfg["grid"])
    P = build_divergence_form(grid, Constant(1.0))
    Pt = build_tilde_A(P, DampingOperator(np.ones(grid.size)))
    ts = np.geomspace(*cfg["slope_times"])
    l12 = np.array([hp.semigroup_operator_norm(Pt, t, "L1->L2") for t in ts])
    fit = fit_loglog(TimeSeries(ts, l12))
    res.add("d1_l1l2_slope_constant", "L1 -> L2 decay t^-1/4, constant coefficients", fit.slope, "-0.25 +- 0.05", abs(fit.slope + 0.25) <= 0.05)
    _nash_stability(res, cfg, "d1")


def run_heat_2d(cfg: Dict, ctx: Context, res: ScenarioResult):
    _heat_checks(res, cfg, "d2", -0.5, 0.08)
    _nash_stability(res, cfg, "d2")


def run_contour(cfg: Dict, ctx: Context, res: ScenarioResult):
    rng = make_rng(cfg["seed"])
    spectra = [np.array(s, dtype=float) for s in cfg["spectra"]]
    for _ in range(cfg["random_spectra"]):
        spectra.append(np.concatenate([[0.0], rng.uniform(0, 10, cfg["random_size"] - 1)]))
    d0, a0 = cfg["delta"], cfg["height"]
    worst, worst_def = 0.0, 0.0
    rows = []

    def one(job):
        k, t = job
        lam = spectra[k]
        m = rng_orthogonal(len(lam), cfg["seed"] + k)
        mat = (m * lam) @ m.T
        mat = 0.5 * (mat + mat.T)
        exact = (m * np.exp(-t * lam)) @ m.T
        c = ct.build_paper_contour(t, d0, a0, panels=cfg["panels"])
        approx = ct.semigroup_via_contour(mat, t, c, drift_tol=1e-8)
        err = np.abs(approx - exact).max() / max(np.abs(exact).max(), 1.0)
        dev = 0.0
        for fd, fa in ((0.7, 0.7), (1.3, 1.3), (0.7, 1.3), (1.3, 0.7)):
            alt = ct.semigroup_via_contour(mat, t, ct.build_paper_contour(t, d0 * fd, a0 * fa, panels=cfg["panels"]), check=False)
            dev = max(dev, np.abs(alt - approx).max() / max(np.abs(approx).max(), 1.0))
        return k, t, err, dev

    jobs = [(k, t) for k in range(len(spectra)) for t in cfg["times"]]
    for k, t, err, dev in ctx.map(one, jobs):
        worst, worst_def = max(worst, err), max(worst_def, dev)
        rows.append((k, t, err, dev))
    res.add("semigroup_reconstruction", "contour integral of (i lam + At)^-1 e^(i lam t) = e^(-t At)", worst, "<= 1e-6 relative to the contraction bound", worst <= 1e-6)
    res.add("deformation_invariance", "contour deformation invariance", worst_def, "<= 1e-8", worst_def <= 1e-8)
    res.tables["semigroup"] = {k: np.array(v) for k, v in zip(("spectrum", "t", "rel_error", "deformation"), zip(*rows))}
    for a in cfg["residue_a"]:
        t = 1.0 / a
        tv = (t * ct.residue_check_optimality(a, t)).real
        res.add(f"residue_a{a:g}", "residue t * value = e^-1 at t = 1/a", tv, "e^-1 +- 1e-4", abs(tv - np.exp(-1)) <= 1e-4)
    lf = cfg["low_frequency"]
    prob = get_problem(lf["problem"])
    data = make_data(prob.grid, lf["data"])
    disc = []
    for t in lf["times"]:
        traj = propagate(prob.gen, data, [t], dt=t / 200)
        low = hp.cutoff_projector(prob.tilde, prob.B, lf["eps"], low=True)
        ref = low @ traj.u[0]
        c = ct.build_paper_contour(t, d0, a0, panels=cfg["panels"], include_rays=False)
        val = ct.low_frequency_profile_integral(prob.A, prob.B, data, t, c, lf["eps"], tilde_A=prob.tilde)
        disc.append(discrete_norm(val - ref, "L2", prob.grid) / discrete_norm(data.state, "energyH", prob.grid, prob.A))
    disc = np.array(disc)
    tl = np.array(lf["times"], dtype=float)
    kappa = np.log(disc[0] / disc[1:]) / (tl[1:] - tl[0])
    ok = bool(np.all(np.diff(disc) < 0) and kappa.min() >= 0.5 * a0)
    res.add("low_frequency_integral", "low-frequency profile integral, remainder decays geometrically", float(kappa.min()), f"decreasing, rate >= height/2 = {0.5 * a0:g}", ok)
    res.tables["low_frequency"] = {"t": np.array(lf["times"], dtype=float), "discrepancy": disc}
    dump = ct.build_paper_contour(cfg["times"][0], d0, a0, panels=cfg["panels"])
    res.tables["contour"] = dump.table()
    res.footers["contour"] = f"continuity_residual={dump.continuity_residual():.3e}"


def rng_orthogonal(n: int, seed: int) -> np.ndarray:
    q, r = np.linalg.qr(make_rng(seed).standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def run_gcc_audit(cfg: Dict, ctx: Context, res: ScenarioResult):
    lens = Lens(**cfg["lens"])
    hole_trap = Hole(**cfg["trap_damping"])
    sys_t = gcc.HamiltonianSystem(lens, hole_trap, 2)
    rng = make_rng(cfg["seed"])
    x0 = rng.uniform(-2, 2, (cfg["flow_samples"], 2))
    th = rng.uniform(0, 2 * np.pi, cfg["flow_samples"])
    xi0 = gcc.unit_shell(sys_t, x0, np.stack([np.cos(th), np.sin(th)], -1))
    errs = []
    for dt in (cfg["dt"], cfg["dt"] / 2):
        f = gcc.hamiltonian_flow(sys_t, x0, xi0, cfg["T"], dt)
        p = sys_t.metric(f.x.reshape(-1, 2)) * (f.xi**2).sum(-1).ravel()
        errs.append(np.abs(p - 1).max())
        if dt == cfg["dt"]:
            am = gcc.angular_momentum(f.x, f.xi)
            am_err = np.abs(am - am[0]).max()
    order = np.log2(errs[0] / errs[1])
    res.add("p_conservation", "Hamiltonian conserved along the flow", errs[0], "<= 1e-8", errs[0] <= 1e-8)
    res.add("p_order", "RK4 convergence order of p error", order, ">= 3.5", order >= 3.5)
    res.add("angular_momentum", "angular momentum conserved (radial metric)", am_err, "<= 1e-7", am_err <= 1e-7)
    hole = Hole(**cfg["hole"])
    sys_h = gcc.HamiltonianSystem(Constant(1.0), hole, 2)
    rep = gcc.check_gcc(sys_h, cfg["hole_box"], cfg["T"], dt=cfg["dt"])
    oracle = gcc.hole_crossing_oracle(hole.r_inner, hole.r_outer, cfg["T"])
    res.add("hole_min_average", "GCC holds for compact undamped hole", rep.min_average, f">= oracle - 5% = {0.95 * oracle:.4f}", rep.min_average >= 0.95 * oracle and rep.verdict)
    res.note(rep.summary_line())
    res.note(f"hole oracle {oracle:.6f}")
    rep_t = gcc.check_gcc(sys_t, cfg["trap_box"], cfg["T"], dt=cfg["dt"])
    res.add("trapped_fails", "GCC fails with a stable trapped geodesic", rep_t.min_average, "verdict fail", not rep_t.verdict)
    res.note(rep_t.summary_line())
    f = gcc.hamiltonian_flow(sys_h, rep.x0[::256], rep.xi0[::256], cfg["T"], cfg["dt"])
    fwd = gcc.damping_average(sys_h, rep.x0[::256], rep.xi0[::256], cfg["T"], cfg["dt"])
    back = gcc.damping_average(sys_h, f.x[-1], -f.xi[-1], cfg["T"], cfg["dt"])
    rev = np.abs(fwd - back).max()
    res.add("time_reversal", "average invariant under time reversal", rev, "<= 1e-8", rev <= 1e-8)
    res.tables["gcc_hole"] = rep.table()
    res.footers["gcc_hole"] = rep.summary_line()
    res.tables["gcc_trapped"] = rep_t.table()
    res.footers["gcc_trapped"] = rep_t.summary_line()


def run_gcc_wave(cfg: Dict, ctx: Context, res: ScenarioResult):
    prob = get_problem(cfg["problem"])
    hole = make_field(cfg["problem"]["a"])
    sys1 = gcc.HamiltonianSystem(Constant(1.0), hole, 1)
    rep = gcc.check_gcc(sys1, cfg["gcc_box"], cfg["T"])
    res.add("gcc_1d", "GCC holds for the wave damping", rep.min_average, "verdict pass", rep.verdict)
    draws = random_bump_data(prob.grid, cfg["draws"], cfg["seed"], spread=cfg["spread"])
    z0 = np.stack([d.state for d in draws], axis=1)
    z0 = z0 / energy_norms(z0, prob.A, prob.grid)[1]
    t = time_grid(cfg["times"])
    ts, states, _ = propagate_states(prob.gen, z0, t, cfg["times"].get("dt"))
    sup = np.array([energy_norms(s, prob.A, prob.grid)[0].max() for s in states])
    cert = certify_bound(TimeSeries(ts, sup), 0.5, "none", tuple(cfg["window"]))
    res.add("energy_certificate", "energy decay t^-1/2 under GCC", cert.sup_value, "finite and stabilizes", cert.finite and cert.holds)
    res.tables["energy_sup"] = {"t": ts, "sup_energy0": sup, "running_sup": cert.running_sup}
    consts = []
    for pts in cfg["survey_points"]:
        scfg = copy.deepcopy(cfg["survey_problem"])
        scfg["grid"]["points"] = pts
        sp = get_problem(scfg)
        srep = rs.gcc_resolvent_survey(sp.A, sp.B.diagonal, radii=np.geomspace(*cfg["radii"]))
        consts.append(srep.near_constant)
        res.add(f"low_frequency_bounded_n{pts}", "|lam| ||R(lam)|| bounded near 0", srep.near_constant, "finite, no failures", srep.passes)
        if pts == cfg["survey_points"][-1]:
            res.tables["gcc_survey"] = srep.near_origin.table()
    drift = abs(consts[-1] - consts[0]) / consts[-1]
    res.add("low_frequency_refinement", "low-frequency constant stable under refinement", drift, "<= 0.15", drift <= 0.15)
    sp = get_problem(dict(cfg["survey_problem"], a=1.0))
    strip = rs.LambdaGrid.strip(0.5, 0.05, 5.0, 5, 20, re_min=-0.4)
    sv = rs.survey_lemma_bounds(sp.A, sp.B, strip, "strip_bound")
    res.add("positive_damping_special_case", "a = 1 reduces to the strip bound", sv.min_margin, ">= 1", sv.passes)


def run_indefinite(cfg: Dict, ctx: Context, res: ScenarioResult):
    base = cfg["problem"]
    t = time_grid(cfg["times"])
    rows = []
    for eps in sorted(set(cfg["eps_small"] + cfg["eps_large"] + cfg.get("eps_bracket", []))):
        pcfg = copy.deepcopy(base)
        pcfg["a"] = {"preset": "sum", "terms": [base["a"], cfg["b"]], "weights": [1.0, -eps]}
        pcfg["indefinite"] = True
        prob = get_problem(pcfg)
        srep = rs.gcc_resolvent_survey(prob.A, prob.B.diagonal, radii=np.geomspace(*cfg["radii"]))
        try:
            g = operator_norm_growth(prob.gen, t, cfg["times"].get("dt"), norm="H0")
            excess = float(np.max(np.log(g.values) - cfg["rate"] * g.times))
        except PropagationBlowUp:
            excess = float("inf")
        survey_ok = srep.passes
        growth_ok = excess <= 0
        rows.append((eps, srep.spectral_abscissa, srep.near_constant, len(srep.failures), srep.unresolved_roots, excess))
        res.note(f"eps={eps:g}: abscissa {srep.spectral_abscissa:.3g}, {len(srep.failures)} failures, {srep.unresolved_roots} grid-scale unstable roots, growth excess {excess:.3g}")
        if eps in cfg["eps_small"]:
            res.add(f"survey_eps{eps:g}", "resolvent persists for small indefinite damping", len(srep.failures), "no failures", survey_ok)
            res.add(f"growth_eps{eps:g}", f"||U(t)||_H0 <= e^({cfg['rate']:g} t), t <= {cfg['times']['t_max']:g}", excess, "max log||U|| - rate t <= 0", growth_ok)
        if eps in cfg["eps_large"]:
            detected = (not survey_ok) or (not growth_ok)
            res.add(f"failure_detected_eps{eps:g}", "large indefinite damping breaks the estimates", len(srep.failures), "failure reported", detected)
    res.tables["indefinite"] = {k: np.array(v) for k, v in zip(("eps", "spectral_abscissa", "near_constant", "failures", "unresolved_roots", "growth_excess"), zip(*rows))}


def run_d2_log_profile(cfg: Dict, ctx: Context, res: ScenarioResult):
    angles = cfg["angles"]
    radii = np.geomspace(*cfg["radii"])
    c1 = cfg["d1"]
    grid = make_grid(c1["grid"])
    P = build_divergence_form(grid, make_field(c1.get("g", 1.0)))
    c = make_field(c1["c"])(grid.points())
    chi = (np.abs(grid.points()[:, 0]) <= c1["chi_radius"]).astype(float)
    s1 = rs.cutoff_resolvent_survey(P, c, chi, radii, angles)
    e1 = s1.fit.slope
    res.add("cutoff_exponent_d1", "cutoff resolvent O(|lam|^-1/2) in d=1", e1, "-0.5 +- 0.1", abs(e1 + 0.5) <= 0.1)
    if np.ptp(c) == 0:
        eig = P.spectrum.eigenvalues
        full = np.array([max(1 / np.abs(eig + lam**2 + lam * c[0]).min() for lam in r * np.exp(1j * np.array(angles))) for r in radii])
        ef = fit_loglog(TimeSeries(radii, full)).slope
        res.add("full_exponent_d1", "uncut resolvent O(|lam|^-1) in d=1 (contrast)", ef, "-1 +- 0.1", abs(ef + 1) <= 0.1)
    c2 = cfg["d2"]
    grid2 = make_grid(c2["grid"])
    P2 = build_divergence_form(grid2, make_field(c2.get("g", 1.0)))
    cc2 = make_field(c2["c"])(grid2.points())
    x2 = grid2.points()
    centre = x2[np.argmin((x2**2).sum(1))]
    chi2 = (np.sqrt(((x2 - centre) ** 2).sum(1)) <= c2["chi_radius"] + 1e-12).astype(float)
    s2 = rs.cutoff_resolvent_survey(P2, cc2, chi2, radii, angles)
    e2 = s2.fit.slope
    loc = rs.local_exponents(s2)
    res.add("cutoff_exponent_d2", "cutoff resolvent O(log|lam|) in d=2", e2, "in (-0.15, 0)", -0.15 < e2 < 0)
    res.add("log_fit_d2", "log-law fit beats power-law fit in d=2", s2.log_fit_residual, f"< power residual {s2.power_fit_residual:.3g}", s2.log_fit_residual < s2.power_fit_residual)
    res.note(f"d=2 local exponents (small to large |lam|): {np.round(loc, 4).tolist()}")
    res.tables["cutoff_d1"] = {"radius": s1.radii, "sup_norm": s1.sup_norm}
    res.tables["cutoff_d2"] = {"radius": s2.radii, "sup_norm": s2.sup_norm}
    wcfg = cfg["wave"]
    prob = get_problem(wcfg["problem"])
    data = make_data(prob.grid, wcfg["data"])
    lam1 = prob.tilde.spectrum.eigenvalues[1]
    win = gap_respecting_window(wcfg["t_min"], wcfg["t_max"], lam1)
    t = np.unique(np.rint(np.geomspace(win[0], win[1], wcfg["count"]) / wcfg["dt"]) * wcfg["dt"])
    traj = propagate(prob.gen, data, t, dt=wcfg["dt"])
    prof = hp.profile_v(prob.A, prob.B, data, traj.times, tilde_A=prob.tilde)
    diff = hp.profile_difference(traj, prof, prob.grid, hp.data_scale(data, prob.A, prob.grid))
    cert = certify_bound(diff.normalized(), 1.0, "log")
    res.add("log_profile_certificate_d2", "difference O(t^-1 log t) in d=2", cert.sup_value, f"stabilizes (20%) on {cert.window}", cert.holds)
    res.tables["profile_d2"] = hp.difference_table(diff, 1.0, "log")


# --------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    anchor: str
    modules: tuple
    defaults: Dict
    runner: Callable


def _main(**over):
    base = {"problem": MAIN_PROBLEM, "data": MAIN_DATA, "times": MAIN_TIMES}
    base.update(over)
    return base


CATALOG: Dict[str, ScenarioSpec] = {}


def _register(name, anchor, modules, defaults, runner):
    CATALOG[name] = ScenarioSpec(name, anchor, tuple(modules), defaults, runner)


_register(
    "identities",
    "block resolvent, splitting, commutation, adjoint and cutoff-projection identities",
    ["resolvent_lab", "heat_profile", "operators"],
    {"instances": 50, "max_size": 50, "c": 0.5, "seed": 1, "tolerance": 1e-9},
    run_identities,
)
_register(
    "lemma-surveys",
    "explicit strip/sector resolvent constants and refinement-stable big-O constants",
    ["resolvent_lab", "operators"],
    {
        "instances": LEMMA_INSTANCES,
        "grid": {"points": 32, "length": 6.0},
        "strip": {"re_frac": 0.45, "im_lo": 0.05, "im_hi": 5.0, "n_re": 10, "n_im": 20},
        "sector": {"r_lo": 0.01, "r_hi": 10.0, "n_r": 20, "n_angle": 10},
        "big_o": {"re_max": 0.05, "im_lo": 0.1, "im_hi": 5.0, "n_re": 5, "n_im": 16},
        "drift": 0.15,
    },
    run_lemma_surveys,
)
_register(
    "thm1.1-1d",
    "wave minus heat profile decays like t^-1 (d=1, variable damping)",
    ["damped_wave", "heat_profile", "rates", "operators"],
    _main(fit_window=[20.0, 200.0], max_slope=-0.9),
    run_thm11,
)
_register(
    "thm1.2-1d",
    "measured diffusion exponent m and the t^-(1+m) certificate for L1 data",
    ["damped_wave", "heat_profile", "rates", "operators"],
    _main(norm_samples=24),
    run_thm12,
)
_register(
    "energy-decay",
    "abstract energy decay t^-1/2 for H data, refinement stable",
    ["damped_wave", "rates", "operators"],
    {
        "problem": MAIN_PROBLEM,
        "refinement_points": [1024, 2048],
        "draws": 20,
        "seed": 7,
        "spread": 50.0,
        "times": {"kind": "geometric", "t_min": 10.0, "t_max": 200.0, "count": 40, "dt": 0.5},
        "window": [10.0, 200.0],
        "max_drift": 0.1,
        "localized_data": {"preset": "gaussian", "u0": {"amplitude": 1.0, "width": 5.0}, "u1": None},
        "slope_window": [20.0, 200.0],
        "max_slope": -0.6,
    },
    run_energy_decay,
)
_register(
    "highfreq-t2",
    "high-frequency cutoff part decays faster than t^-2",
    ["heat_profile", "damped_wave", "rates", "operators"],
    _main(times={"kind": "uniform", "t_min": 10.0, "t_max": 200.0, "step": 1.0, "dt": 0.5}, eps=0.1, decreasing_after=20.0),
    run_highfreq,
)
_register(
    "optimality",
    "t^-1 rate is sharp: spectral-bump data at t = 1/a, residue computation",
    ["contour", "heat_profile", "damped_wave"],
    {
        "problem": {
            "grid": {"dim": 1, "points": 512, "length": 100.0, "boundary": "periodic"},
            "g": 1.0,
            "a": {"preset": "sine", "base": 1.0, "amplitude": 0.5, "period": 100.0},
        },
        "a_values": [0.2, 0.1, 0.05],
        "steps": 40,
        "min_ratio": 0.1,
    },
    run_optimality,
)
_register(
    "individual",
    "t * difference tends to zero for each fixed datum",
    ["heat_profile", "damped_wave", "rates"],
    _main(data={"preset": "gaussian", "u0": None, "u1": {"amplitude": 1.0, "width": 3.0, "center": -2.0}}, window_min=20.0),
    run_individual,
)
_HEAT1 = {
    "grid": {"dim": 1, "points": 512, "length": 200.0, "boundary": "periodic"},
    "g": 1.0,
    "c": {"preset": "gaussian", "base": 1.0, "amplitude": 0.5, "width": 10.0},
    "norm_times": [0.05, 100.0, 12],
    "heat_times": [0.01, 100.0, 40],
    "slope_times": [1.0, 100.0, 16],
    "bump_width": 3.0,
    "nash_points": [256, 512],
    "nash_draws": 12,
    "nash_widths": [2.0, 6.0],
    "seed": 3,
}
_register(
    "heat-bounds-1d",
    "heat semigroup: L1 bounds, positivity, modified heat, Nash quotient, t^-1/4",
    ["heat_profile", "operators", "rates"],
    _HEAT1,
    run_heat_1d,
)
_register(
    "heat-bounds-2d",
    "heat semigroup bounds on a 48x48 grid, L1 -> L2 rate t^-1/2",
    ["heat_profile", "operators", "rates"],
    dict(
        _HEAT1,
        grid={"dim": 2, "points": 48, "length": 48.0, "boundary": "periodic"},
        c={"preset": "gaussian", "base": 1.0, "amplitude": 0.5, "width": 6.0},
        norm_times=[0.05, 50.0, 10],
        heat_times=[0.01, 50.0, 30],
        slope_times=[1.0, 20.0, 12],
        bump_width=2.0,
        nash_points=[24, 48],
        nash_widths=[2.0, 4.0],
    ),
    run_heat_2d,
)
_register(
    "contour-semigroup",
    "analytic semigroup from resolvent contour integral; low-frequency profile integral",
    ["contour", "resolvent_lab", "heat_profile"],
    {
        "seed": 11,
        "spectra": [[1.0], [0.0], [0.01, 1.0, 4.0], [0.0, 0.05, 0.3, 2.0, 10.0]],
        "random_spectra": 2,
        "random_size": 12,
        "times": [1.0, 3.0, 10.0, 30.0, 100.0],
        "delta": 0.1,
        "height": 0.1,
        "panels": 8,
        "residue_a": [0.2, 0.1, 0.05, 0.01],
        "low_frequency": {
            "problem": {
                "grid": {"dim": 1, "points": 128, "length": 64.0, "boundary": "periodic"},
                "g": 1.0,
                "a": {"preset": "sine", "base": 1.0, "amplitude": 0.5, "period": 64.0},
            },
            "data": {"preset": "gaussian", "u0": {"amplitude": 1.0, "width": 4.0}, "u1": {"amplitude": 0.5, "width": 3.0}},
            "times": [10.0, 20.0, 40.0, 80.0],
            "eps": 0.1,
        },
    },
    run_contour,
)
_register(
    "gcc-audit",
    "Hamiltonian rays, damping averages, GCC pass for a hole and fail for a trap",
    ["gcc"],
    {
        "seed": 5,
        "T": 10.0,
        "dt": 0.01,
        "flow_samples": 64,
        "lens": {"kappa": 4.0, "sigma": 1.0},
        "trap_damping": {"r_inner": 2.0, "r_outer": 2.5},
        "hole": {"r_inner": 1.5, "r_outer": 2.0},
        "hole_box": 4.0,
        "trap_box": 2.0,
    },
    run_gcc_audit,
)
_HOLE = {"preset": "hole", "r_inner": 1.5, "r_outer": 2.0}
_register(
    "gcc-wave",
    "energy decay and low-frequency resolvent bound with a compact undamped hole",
    ["damped_wave", "resolvent_lab", "gcc", "rates"],
    {
        "problem": {"grid": {"dim": 1, "points": 2048, "length": 400.0, "boundary": "periodic"}, "g": 1.0, "a": _HOLE},
        "T": 10.0,
        "gcc_box": 10.0,
        "draws": 8,
        "seed": 9,
        "spread": 20.0,
        "times": {"kind": "geometric", "t_min": 10.0, "t_max": 200.0, "count": 40, "dt": 0.5},
        "window": [10.0, 200.0],
        "survey_problem": {"grid": {"dim": 1, "points": 256, "length": 40.0, "boundary": "periodic"}, "g": 1.0, "a": _HOLE},
        "survey_points": [256, 512],
        "radii": [1e-3, 1e-1, 9],
    },
    run_gcc_wave,
)
_register(
    "indefinite-damping",
    "sign-indefinite damping a - eps b: small eps survives, large eps fails",
    ["resolvent_lab", "damped_wave"],
    {
        "problem": {"grid": {"dim": 1, "points": 256, "length": 40.0, "boundary": "dirichlet"}, "g": 1.0, "a": _HOLE},
        "b": 1.0,
        "eps_small": [0.05],
        "eps_large": [5.0],
        "eps_bracket": [0.5, 1.0],
        "rate": 0.2,
        "times": {"kind": "uniform", "t_min": 0.5, "t_max": 50.0, "step": 0.5, "dt": 0.5},
        "radii": [1e-3, 1e-1, 9],
    },
    run_indefinite,
)
_register(
    "d2-log-profile",
    "endpoint dimensions: cutoff resolvent growth in d=1,2 and the t^-1 log t profile bound",
    ["resolvent_lab", "heat_profile", "damped_wave", "rates"],
    {
        "radii": [1e-4, 1e-1, 13],
        "angles": [-np.pi / 4, 0.0, np.pi / 4],
        "d1": {"grid": {"dim": 1, "points": 2000, "length": 1000.5, "boundary": "dirichlet"}, "c": 1.0, "chi_radius": 1.0},
        "d2": {"grid": {"dim": 2, "points": 90, "length": 182.0, "boundary": "dirichlet"}, "c": 1.0, "chi_radius": 0.0},
        "wave": {
            "problem": {
                "grid": {"dim": 2, "points": 48, "length": 144.0, "boundary": "periodic"},
                "g": 1.0,
                "a": {"preset": "sine", "base": 1.0, "amplitude": 0.5, "period": 144.0},
            },
            "data": {"preset": "gaussian", "u0": {"amplitude": 1.0, "width": 6.0}, "u1": {"amplitude": 0.5, "width": 6.0}},
            "t_min": 10.0,
            "t_max": 200.0,
            "count": 16,
            "dt": 0.5,
        },
    },
    run_d2_log_profile,
)


def deep_merge(base: Dict, over: Optional[Dict]) -> Dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def run_scenario(
    name: str, overrides: Optional[Dict] = None, workers: int = 1, raise_errors: bool = False
) -> ScenarioResult:
    """Run a catalog entry.  A numerical exception becomes a failing
    ``scenario_error`` check unless ``raise_errors`` is set."""
    if name not in CATALOG:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(sorted(CATALOG))}")
    spec = CATALOG[name]
    cfg = deep_merge(spec.defaults, overrides)
    res = ScenarioResult(name, cfg)
    t0 = time.perf_counter()
    try:
        spec.runner(cfg, Context(workers), res)
    except Exception as exc:
        if raise_errors:
            raise
        res.add("scenario_error", f"{type(exc).__name__}: {exc}", float("nan"), "no exception", False)
    res.elapsed = time.perf_counter() - t0
    return res


def catalog() -> List[Dict]:
    return [{"name": s.name, "anchor": s.anchor, "modules": list(s.modules)} for s in CATALOG.values()]
