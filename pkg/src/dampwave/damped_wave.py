"""First-order form of the damped wave equation and its propagator.

The state ``z = (u, u_t)`` evolves under ``z' = G z`` with
``G = [[0, I], [-A, -B]]``.  The primary propagator is a single matrix
exponential ``exp(G dt)`` applied repeatedly; an adaptive Runge-Kutta path
is kept for cross-checks on small problems.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from .operators import DampingOperator, Grid, SelfAdjointOperator, discrete_norm
from .rates import BoundCertificate, TimeSeries, certify_bound


class PropagationBlowUp(FloatingPointError):
    """Raised when a propagated state grows beyond any plausible bound."""


@dataclass(frozen=True)
class CauchyData:
    u0: np.ndarray
    u1: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        u0 = np.asarray(self.u0, dtype=float)
        u1 = np.asarray(self.u1, dtype=float)
        if u0.shape != u1.shape or u0.ndim != 1:
            raise ValueError(f"u0 {u0.shape} and u1 {u1.shape} must be equal-length vectors")
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "u1", u1)

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([self.u0, self.u1])


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    method: str
    dt: Optional[float] = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("state count must equal time count")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    @property
    def u(self) -> np.ndarray:
        return self.states[:, : self.n]

    @property
    def v(self) -> np.ndarray:
        return self.states[:, self.n :]


class BlockGenerator:
    """The ``2n x 2n`` generator with a per-step-size cache of ``exp(G dt)``."""

    def __init__(self, A: SelfAdjointOperator, B: DampingOperator):
        if A.n != B.n:
            raise ValueError(f"size mismatch: A is {A.n}, B is {B.n}")
        n = A.n
        m = np.zeros((2 * n, 2 * n))
        m[:n, n:] = np.eye(n)
        m[n:, :n] = -A.matrix
        m[n:, n:] = -np.diag(B.diagonal)
        m.setflags(write=False)
        self.A, self.B, self.matrix = A, B, m
        self._steps: Dict[float, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def grid(self) -> Optional[Grid]:
        return self.A.grid

    def step_matrix(self, dt: float) -> np.ndarray:
        key = float(dt)
        e = self._steps.get(key)
        if e is None:
            with self._lock:
                e = self._steps.get(key)
                if e is None:
                    e = sla.expm(self.matrix * key)
                    e.setflags(write=False)
                    self._steps[key] = e
        return e

    def dissipation_residual(self, samples: int = 8, seed: int = 0) -> float:
        """Max relative gap between ``Re<Gz, z>_H0`` and ``-(Bv, v)``."""
        rng = np.random.default_rng(seed)
        n = self.n
        worst = 0.0
        for _ in range(samples):
            z = rng.standard_normal(2 * n)
            u, v = z[:n], z[n:]
            gz = self.matrix @ z
            lhs = u @ (self.A.matrix @ gz[:n]) + v @ gz[n:]
            rhs = -v @ (self.B.diagonal * v)
            scale = abs(u @ self.A.matrix @ u) + v @ v
            worst = max(worst, abs(lhs - rhs) / scale)
        return worst


def build_block_generator(A: SelfAdjointOperator, B: DampingOperator) -> BlockGenerator:
    return BlockGenerator(A, B)


def default_step(times: np.ndarray) -> float:
    """``min(0.05 t_min, half the smallest sample gap)``."""
    t = np.asarray(times, dtype=float)
    dt = 0.05 * t[0]
    if t.size > 1:
        dt = min(dt, 0.5 * np.diff(t).min())
    return float(dt)


def _check_times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.size == 0 or t[0] <= 0 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be positive and strictly increasing")
    return t


def propagate_states(
    gen: BlockGenerator,
    states: np.ndarray,
    times,
    dt: Optional[float] = None,
    blowup: float = 1e12,
):
    """Advance a batch of states (columns of a ``2n x k`` array).

    Returns ``(snapped_times, array of shape (len(times), 2n, k), dt)``.  Sample
    times are snapped to multiples of ``dt``.
    """
    t = _check_times(times)
    dt = default_step(t) if dt is None else float(dt)
    steps = np.maximum(np.rint(t / dt).astype(np.int64), 1)
    if np.any(np.diff(steps) <= 0):
        raise ValueError(f"step {dt} too coarse to separate the sample times")
    e = gen.step_matrix(dt)
    z = np.array(states, dtype=float, copy=True)
    squeeze = z.ndim == 1
    if squeeze:
        z = z[:, None]
    scale = np.linalg.norm(z) or 1.0
    out = np.empty((t.size,) + z.shape)
    k = 0
    for i, target in enumerate(steps):
        while k < target:
            z = e @ z
            k += 1
        norm = np.linalg.norm(z)
        if not np.isfinite(norm) or norm > blowup * scale:
            raise PropagationBlowUp(f"state norm grew by {norm / scale:.3e} by t={k * dt:.4g}")
        out[i] = z
    if squeeze:
        out = out[:, :, 0]
    return steps * dt, out, dt


def propagate(
    gen: BlockGenerator,
    data: CauchyData,
    times,
    method: str = "stepped-exponential",
    dt: Optional[float] = None,
) -> Trajectory:
    """Sample ``exp(tG) (u0, u1)`` at the requested times.

    ``method`` is ``stepped-exponential`` (default), ``rk-check`` (adaptive
    RK45 at tight tolerance, for small problems) or ``eigen``
    (diagonalization of ``G``; refused when the eigenvectors are
    ill-conditioned, e.g. at critical damping).
    """
    if data.u0.size != gen.n:
        raise ValueError(f"data length {data.u0.size} does not match operator size {gen.n}")
    t = _check_times(times)
    z0 = data.state
    if method == "stepped-exponential":
        ts, states, dt = propagate_states(gen, z0, t, dt)
        return Trajectory(ts, states, method, dt)
    if method == "rk-check":
        m = gen.matrix
        sol = solve_ivp(
            lambda _, z: m @ z,
            (0.0, t[-1]),
            z0,
            method="RK45",
            t_eval=t,
            rtol=1e-11,
            atol=1e-13 * max(np.abs(z0).max(), 1.0),
        )
        if not sol.success:
            raise RuntimeError(sol.message)
        return Trajectory(t, sol.y.T.copy(), method)
    if method == "eigen":
        w, V = np.linalg.eig(gen.matrix)
        cond = np.linalg.cond(V)
        if cond > 1e8:
            raise np.linalg.LinAlgError(f"generator eigenvectors ill-conditioned (cond {cond:.2e})")
        c = np.linalg.solve(V, z0)
        states = np.real((V[None, :, :] * (np.exp(np.outer(t, w)) * c)[:, None, :]).sum(axis=2))
        return Trajectory(t, states, method)
    raise ValueError(f"unknown method {method!r}")


def energy(state: np.ndarray, A: SelfAdjointOperator, grid: Optional[Grid] = None):
    """``(||z||_H0, ||z||_H)`` for a stacked state."""
    grid = grid or A.grid
    return (
        discrete_norm(state, "energy0", grid, A),
        discrete_norm(state, "energyH", grid, A),
    )


def trajectory_table(traj: Trajectory, A: SelfAdjointOperator, grid: Optional[Grid] = None) -> Dict[str, np.ndarray]:
    """Columns of the trajectory CSV."""
    grid = grid or A.grid
    n = traj.n
    cols = {k: [] for k in ("t", "norm_L2_u", "norm_H1_u", "norm_L2_v", "energy0", "energyH")}
    for t, z in zip(traj.times, traj.states):
        e0, eh = energy(z, A, grid)
        cols["t"].append(t)
        cols["norm_L2_u"].append(discrete_norm(z[:n], "L2", grid))
        cols["norm_H1_u"].append(discrete_norm(z[:n], "H1", grid, A))
        cols["norm_L2_v"].append(discrete_norm(z[n:], "L2", grid))
        cols["energy0"].append(e0)
        cols["energyH"].append(eh)
    return {k: np.asarray(v) for k, v in cols.items()}


@dataclass
class DissipationReport:
    times: np.ndarray
    energy0: np.ndarray
    max_increase: float
    derivative_residual: float
    monotone: bool
    derivative_ok: bool

    @property
    def passes(self) -> bool:
        return self.monotone and self.derivative_ok


def _five_point_derivative(y: np.ndarray, h: float) -> np.ndarray:
    return (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)


def check_dissipation(
    gen: BlockGenerator,
    data: CauchyData,
    times,
    derivative_tol: float = 1e-6,
    monotone_tol: float = 1e-12,
    grid: Optional[Grid] = None,
) -> DissipationReport:
    """Energy monotonicity and ``E'(t) = -(B u_t, u_t)`` along uniform samples.

    ``E = ||z||_H0^2 / 2``; the derivative uses a five-point stencil so the
    comparison is limited by ``O(dt^4)``.  Violations are reported, not raised.
    """
    t = _check_times(times)
    if t.size < 5 or np.ptp(np.diff(t)) > 1e-9 * t[-1]:
        raise ValueError("need at least five uniformly spaced times")
    grid = grid or gen.grid
    w = grid.cell_volume if grid is not None else 1.0
    h = float(t[1] - t[0])
    traj = propagate(gen, data, t, dt=h)
    n = gen.n
    e0 = np.empty(t.size)
    for i, z in enumerate(traj.states):
        u, v = z[:n], z[n:]
        e0[i] = np.sqrt(w * (max(u @ gen.A.matrix @ u, 0.0) + v @ v))
    scale = max(e0[0], np.finfo(float).tiny)
    incr = np.diff(e0) / scale
    max_inc = float(max(incr.max(), 0.0))
    big_e = 0.5 * e0**2
    d_num = _five_point_derivative(big_e, h)
    vv = traj.v[2:-2]
    d_exact = -w * np.einsum("ij,j,ij->i", vv, gen.B.diagonal, vv)
    resid = float(np.abs(d_num - d_exact).max() / max(big_e[0], np.finfo(float).tiny))
    return DissipationReport(t, e0, max_inc, resid, max_inc <= monotone_tol, resid <= derivative_tol)


@dataclass
class GrowthBound:
    certificate: BoundCertificate
    h0_contraction: float
    constant: float


def propagator_growth_bound(
    gen: BlockGenerator,
    samples: np.ndarray,
    times,
    dt: Optional[float] = None,
    grid: Optional[Grid] = None,
) -> GrowthBound:
    """Empirical ``sup ||U(t) f||_H / ((1 + t) ||f||_H)`` over data columns.

    ``samples`` has shape ``(2n, k)``.  Also reports the sup of the ``H0``
    ratio, which must not exceed one for a contraction.
    """
    grid = grid or gen.grid
    ts, states, _ = propagate_states(gen, samples, times, dt)
    n = gen.n
    a = gen.A.matrix
    w = grid.cell_volume if grid is not None else 1.0

    def norms(z):
        u, v = z[:n], z[n:]
        h0 = w * (np.maximum(np.einsum("ik,ij,jk->k", u, a, u), 0.0) + (v**2).sum(0))
        return np.sqrt(h0), np.sqrt(h0 + w * (u**2).sum(0))

    f0, fh = norms(samples)
    ratios_h = np.empty(ts.size)
    ratios_0 = np.empty(ts.size)
    for i, z in enumerate(states):
        g0, gh = norms(z)
        ratios_h[i] = np.max(gh / fh)
        nz = f0 > 0
        ratios_0[i] = np.max(g0[nz] / f0[nz]) if nz.any() else 0.0
    cert = certify_bound(TimeSeries(ts, ratios_h, "H growth"), -1.0, "shifted")
    return GrowthBound(cert, float(ratios_0.max()), cert.sup_value)


def operator_norm_growth(
    gen: BlockGenerator,
    times,
    dt: Optional[float] = None,
    grid: Optional[Grid] = None,
    norm: str = "H",
) -> TimeSeries:
    """Exact ``||U(t)||`` in ``H`` or ``H0`` via singular values of the
    weighted propagator.  ``H0`` needs ``A`` positive definite."""
    n = gen.n
    t = _check_times(times)
    dt = default_step(t) if dt is None else float(dt)
    ew, eq = np.linalg.eigh(gen.A.matrix)
    if norm == "H":
        ew = 1.0 + np.clip(ew, 0, None)
    elif norm == "H0":
        if ew.min() <= 0:
            raise ValueError("H0 operator norm needs A > 0 (use Dirichlet boundary)")
    else:
        raise ValueError(f"unknown norm {norm!r}")
    root = (eq * np.sqrt(ew)) @ eq.T
    iroot = (eq / np.sqrt(ew)) @ eq.T
    W = sla.block_diag(root, np.eye(n))
    Wi = sla.block_diag(iroot, np.eye(n))
    ts, states, _ = propagate_states(gen, Wi, t, dt)
    vals = np.array([np.linalg.norm(W @ s, 2) for s in states])
    return TimeSeries(ts, vals, f"||U(t)||_{norm}")
