"""Heat-type comparison profile and heat-semigroup estimates.

The profile is ``v(t) = B^{-1/2} exp(-t At) B^{-1/2} (B u0 + u1)`` with
``At = B^{-1/2} A B^{-1/2}``.  All functions of ``At`` go through its cached
eigendecomposition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .damped_wave import CauchyData, Trajectory
from .operators import (
    DampingOperator,
    Grid,
    SelfAdjointOperator,
    apply_spectral_function,
    build_tilde_A,
    discrete_norm,
    step_cutoff,
)
from .rates import BoundCertificate, TimeSeries, certify_bound


@dataclass(frozen=True)
class HeatProfile:
    times: np.ndarray
    states: np.ndarray
    variant: str
    tilde_A: SelfAdjointOperator


def profile_v(
    A: SelfAdjointOperator,
    B: DampingOperator,
    data: CauchyData,
    times,
    variant: str = "strict_positive",
    tilde_A: Optional[SelfAdjointOperator] = None,
) -> HeatProfile:
    """Evaluate the heat profile at the given times.

    ``variant='gcc_surrogate'`` means ``B`` holds ``c = a + b`` rather than the
    damping itself; the formula is the same.
    """
    if variant not in ("strict_positive", "gcc_surrogate"):
        raise ValueError(f"unknown variant {variant!r}")
    if B.diagonal.min() <= 0:
        raise ValueError("profile needs strictly positive B (use c = a + b otherwise)")
    At = tilde_A if tilde_A is not None else build_tilde_A(A, B)
    spec = At.spectrum
    t = np.atleast_1d(np.asarray(times, dtype=float))
    s_half, s_mhalf = B.diagonal**0.5, B.diagonal**-0.5
    w = spec.eigenvectors.T @ (s_half * data.u0 + s_mhalf * data.u1)
    decay = np.exp(-np.outer(t, np.clip(spec.eigenvalues, 0, None)))
    states = (decay * w) @ spec.eigenvectors.T * s_mhalf
    return HeatProfile(t, states, variant, At)


def data_scale(data: CauchyData, A: SelfAdjointOperator, grid: Grid, kind: str = "H") -> float:
    """Normalization of the profile difference.

    ``H``: ``|u0| + |sqrt(A) u0| + |u1|`` in L2.  ``L1L2``: the L1 and L2 norms
    of ``u0`` and ``u1`` summed, plus ``|sqrt(A) u0|``.
    """
    h1 = discrete_norm(data.u0, "H1", grid, A)
    if kind == "H":
        return discrete_norm(data.u0, "L2", grid) + h1 + discrete_norm(data.u1, "L2", grid)
    if kind == "L1L2":
        return (
            sum(discrete_norm(u, k, grid) for u in (data.u0, data.u1) for k in ("L1", "L2")) + h1
        )
    raise ValueError(f"unknown normalization {kind!r}")


def profile_difference(
    traj: Trajectory,
    profile: HeatProfile,
    grid: Grid,
    normalization: float = 1.0,
) -> TimeSeries:
    """``||u(t_k) - v(t_k)||_{L2}``; ``.normalized()`` divides by the data scale."""
    if traj.times.shape != profile.times.shape or not np.allclose(traj.times, profile.times, rtol=1e-12):
        raise ValueError("trajectory and profile time grids differ")
    d = traj.u - profile.states
    vals = np.sqrt(grid.cell_volume * (d**2).sum(axis=1))
    return TimeSeries(traj.times, vals, "diff_L2", normalization)


def difference_table(series: TimeSeries, p: float, modifier: str = "none"):
    """Columns of the profile CSV, with the running sup of the weighted series."""
    cert = certify_bound(series.normalized(), p, modifier)
    return {
        "t": series.times,
        "diff_L2": series.values,
        "normalized_diff": series.values / series.normalization,
        "certificate_running_sup": cert.running_sup,
    }


def _conjugated(At: SelfAdjointOperator, t: float, left=None, right=None) -> np.ndarray:
    m = apply_spectral_function(At, lambda x: np.exp(-t * np.clip(x, 0, None)))
    if left is not None:
        m = left[:, None] * m
    if right is not None:
        m = m * right[None, :]
    return m


def semigroup_operator_norm(
    op: SelfAdjointOperator,
    t: float,
    kind: str,
    left: Optional[np.ndarray] = None,
    right: Optional[np.ndarray] = None,
    weight: Optional[np.ndarray] = None,
) -> float:
    """Exact discrete norm of ``M = diag(left) exp(-t op) diag(right)``.

    ``kind``: ``L1->L2``, ``L1->L1``, ``L2->Linf`` or ``weighted L1->L1``
    (the L1 norm with density ``weight`` on both sides).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    grid = op.grid
    d, h = grid.dim, grid.h
    if kind == "L1->L2" and left is None and right is None:
        spec = op.spectrum
        col2 = (spec.eigenvectors**2) @ np.exp(-2 * t * np.clip(spec.eigenvalues, 0, None))
        return float(h ** (-d / 2) * np.sqrt(col2.max()))
    m = _conjugated(op, t, left, right)
    if kind == "L1->L2":
        return float(h ** (-d / 2) * np.sqrt((m**2).sum(axis=0).max()))
    if kind == "L2->Linf":
        return float(h ** (-d / 2) * np.sqrt((m**2).sum(axis=1).max()))
    if kind == "L1->L1":
        return float(np.abs(m).sum(axis=0).max())
    if kind == "weighted L1->L1":
        if weight is None:
            raise ValueError("weighted norm needs a weight")
        return float(((weight[:, None] * np.abs(m)).sum(axis=0) / weight).max())
    raise ValueError(f"unknown norm kind {kind!r}")


def tilde_P(P: SelfAdjointOperator, c: DampingOperator) -> SelfAdjointOperator:
    return build_tilde_A(P, c)


@dataclass
class NashReport:
    heat_drift: float
    min_value: float
    nash_quotient: np.ndarray
    quotient_max_rise: float
    nash_constant: float
    times: np.ndarray

    def violations(self, drift_tol=1e-8, positivity_tol=-1e-10, rise_tol=1e-12):
        out = []
        if self.heat_drift > drift_tol:
            out.append(f"modified total heat drift {self.heat_drift:.3e}")
        if self.min_value < positivity_tol:
            out.append(f"positivity violated, min {self.min_value:.3e}")
        if self.quotient_max_rise > rise_tol:
            out.append(f"Nash quotient rose by {self.quotient_max_rise:.3e}")
        return out


def heat_evolution(op: SelfAdjointOperator, u0: np.ndarray, times) -> np.ndarray:
    """Rows ``exp(-t op) u0`` for each ``t``."""
    spec = op.spectrum
    w = spec.eigenvectors.T @ u0
    decay = np.exp(-np.outer(np.atleast_1d(times), np.clip(spec.eigenvalues, 0, None)))
    return (decay * w) @ spec.eigenvectors.T


def nash_constant(op: SelfAdjointOperator, root_c: np.ndarray, samples: np.ndarray) -> float:
    """Largest ratio ``||u||^{2+4/d} / ((op u, u) ||c^{1/2} u||_{L1}^{4/d})`` over columns."""
    grid = op.grid
    d, w = grid.dim, grid.cell_volume
    worst = 0.0
    for u in samples.T:
        l2sq = w * u @ u
        form = w * max(u @ op.matrix @ u, np.finfo(float).tiny)
        l1 = w * np.abs(root_c * u).sum()
        worst = max(worst, l2sq ** (1 + 2 / d) / (form * l1 ** (4 / d)))
    return float(worst)


def nash_and_conservation_checks(
    op: SelfAdjointOperator,
    c: DampingOperator,
    u0: np.ndarray,
    times,
    nash_samples: Optional[np.ndarray] = None,
) -> NashReport:
    """Heat conservation, positivity, Nash-quotient monotonicity for ``exp(-t op)``.

    ``op`` is the conjugated operator ``c^{-1/2} P c^{-1/2}``; the conserved
    quantity is ``int c^{1/2} u``.  ``nash_samples`` (columns) feed the
    empirical Nash constant.
    """
    grid = op.grid
    w = grid.cell_volume
    t = np.atleast_1d(np.asarray(times, dtype=float))
    root_c = c.diagonal**0.5
    u = heat_evolution(op, u0, t)
    heat0 = w * root_c @ u0
    heat = w * u @ root_c
    drift = float(np.abs(heat - heat0).max() / max(abs(heat0), np.finfo(float).tiny))
    l2sq = w * (u**2).sum(axis=1)
    l1 = w * np.abs(u * root_c).sum(axis=1)
    H = l2sq / l1**2
    rise = float(max((np.diff(H) / H[:-1]).max(), 0.0)) if t.size > 1 else 0.0
    cn = nash_constant(op, root_c, nash_samples) if nash_samples is not None else float("nan")
    return NashReport(drift, float(u.min()), H, rise, cn, t)


@dataclass
class HighFrequencyReport:
    certificate: BoundCertificate
    series: TimeSeries
    idempotence_residual: float
    adjoint_residual: float
    projector: np.ndarray


def cutoff_projector(At: SelfAdjointOperator, B: DampingOperator, eps: float, low: bool = False) -> np.ndarray:
    """``B^{-1/2} phi(At) B^{1/2}``; with ``low=True`` the complement ``1 - phi``."""
    f = step_cutoff(eps)
    g = (lambda x: 1.0 - f(x)) if low else f
    m = apply_spectral_function(At, g)
    return (B.diagonal**-0.5)[:, None] * m * (B.diagonal**0.5)[None, :]


def highfreq_cutoff_decay(
    A: SelfAdjointOperator,
    B: DampingOperator,
    traj: Trajectory,
    eps: float,
    data_norm: float,
    window=None,
    tilde_A: Optional[SelfAdjointOperator] = None,
) -> HighFrequencyReport:
    """Certificate for ``sup t^2 ||phi_B(A) U(t) f||_H / ||f||_H``.

    Also returns the idempotence residual and the adjoint residual against
    ``B^{1/2} phi(At) B^{-1/2}``.
    """
    At = tilde_A if tilde_A is not None else build_tilde_A(A, B)
    lam = At.spectrum.eigenvalues
    positive = lam[lam > 1e-12 * max(lam.max(), 1.0)]
    if positive.size == 0 or eps <= positive.min():
        warnings.warn("cutoff below the smallest positive eigenvalue: phi acts as the identity off the kernel")
    grid = A.grid
    phi = cutoff_projector(At, B, eps)
    scale = max(np.abs(phi).max(), 1.0)
    idem = float(np.abs(phi @ phi - phi).max() / scale)
    adj_expected = (B.diagonal**0.5)[:, None] * apply_spectral_function(At, step_cutoff(eps)) * (B.diagonal**-0.5)[None, :]
    adj = float(np.abs(phi.T - adj_expected).max() / scale)
    pu = traj.u @ phi.T
    pv = traj.v @ phi.T
    w = grid.cell_volume
    quad = np.maximum(np.einsum("ki,ij,kj->k", pu, A.matrix, pu), 0.0)
    vals = np.sqrt(w * (quad + (pu**2).sum(1) + (pv**2).sum(1))) / data_norm
    series = TimeSeries(traj.times, vals, "cutoff energy", 1.0)
    cert = certify_bound(series, 2.0, "none", window)
    return HighFrequencyReport(cert, series, idem, adj, phi)
