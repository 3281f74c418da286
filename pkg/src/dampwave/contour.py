"""Contour quadrature for analytic semigroups and resolvent integrals.

A contour is an ordered list of segments (arcs, line pieces, truncated rays),
each discretized by composite 16-point Gauss-Legendre panels whose widths
shrink geometrically toward the segment ends that sit near the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .damped_wave import CauchyData
from .heat_profile import cutoff_projector
from .operators import DampingOperator, SelfAdjointOperator, build_tilde_A
from .resolvent import pencil

GL_ORDER = 16
TAIL_LEVEL = 1e-14
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


def _panel_edges(panels: int, grade: str, ratio: float = 0.5) -> np.ndarray:
    """Panel breakpoints on [0, 1], geometrically refined toward ``grade``
    ('start', 'end', 'both' or 'none')."""
    if grade == "none" or panels == 1:
        return np.linspace(0.0, 1.0, panels + 1)
    if grade == "both":
        half = _panel_edges(max(panels // 2, 1), "start", ratio) * 0.5
        return np.concatenate([half, 1.0 - half[::-1][1:]])
    widths = ratio ** np.arange(panels)[::-1]
    edges = np.concatenate([[0.0], np.cumsum(widths)]) / widths.sum()
    return edges if grade == "start" else 1.0 - edges[::-1]


@dataclass
class Segment:
    """Path ``z(s)``, ``s`` in [0, 1], with derivative ``dz(s)``."""

    name: str
    z: Callable[[np.ndarray], np.ndarray]
    dz: Callable[[np.ndarray], np.ndarray]
    panels: int
    grade: str

    def nodes(self, refine: int = 1):
        edges = _panel_edges(self.panels * refine, self.grade)
        a, b = edges[:-1, None], edges[1:, None]
        s = (0.5 * (b - a) * _GL_X[None, :] + 0.5 * (a + b)).ravel()
        w = (0.5 * (b - a) * _GL_W[None, :]).ravel()
        return s, self.z(s), self.dz(s) * w


def line(name: str, z0: complex, z1: complex, panels: int, grade: str) -> Segment:
    return Segment(name, lambda s: z0 + (z1 - z0) * s, lambda s: np.full(s.shape, z1 - z0), panels, grade)


def arc(name: str, radius: float, theta0: float, theta1: float, panels: int) -> Segment:
    dth = theta1 - theta0
    return Segment(
        name,
        lambda s: radius * np.exp(1j * (theta0 + dth * s)),
        lambda s: 1j * dth * radius * np.exp(1j * (theta0 + dth * s)),
        panels,
        "none",
    )


@dataclass
class Contour:
    segments: List[Segment]
    t: float
    delta: float
    height: float
    r_max: Optional[float]
    refine: int = 1

    def nodes(self):
        """Arrays ``(segment_id, s, lambda, weight)`` in traversal order."""
        ids, ss, zs, ws = [], [], [], []
        for k, seg in enumerate(self.segments):
            s, z, w = seg.nodes(self.refine)
            ids.append(np.full(s.shape, k))
            ss.append(s)
            zs.append(z)
            ws.append(w)
        return np.concatenate(ids), np.concatenate(ss), np.concatenate(zs), np.concatenate(ws)

    def refined(self, factor: int = 2) -> "Contour":
        return Contour(self.segments, self.t, self.delta, self.height, self.r_max, self.refine * factor)

    def continuity_residual(self) -> float:
        ends = [(seg.z(np.array([0.0]))[0], seg.z(np.array([1.0]))[0]) for seg in self.segments]
        return float(max((abs(ends[k][1] - ends[k + 1][0]) for k in range(len(ends) - 1)), default=0.0))

    def table(self):
        ids, s, z, w = self.nodes()
        return {"segment_id": ids, "s": s, "re_lambda": z.real, "im_lambda": z.imag, "weight": np.abs(w)}


def ray_length(t: float, height: float, r_max: Optional[float] = None) -> float:
    """Parameter length of a 45-degree ray from height ``height`` at which
    ``exp(-t Im lam)`` drops below the tail level."""
    need = max(np.log(1 / TAIL_LEVEL) / t - height, 0.0)
    if r_max is None:
        return need
    if r_max < need * np.sqrt(2) + height:
        raise ValueError(f"R_max={r_max} too small: the tail needs a ray out to radius {need * np.sqrt(2) + height:.4g}")
    return (r_max - height) / np.sqrt(2)


def build_paper_contour(
    t: float,
    delta: float = 0.1,
    a: float = 0.1,
    r_max: Optional[float] = None,
    panels: int = 8,
    include_rays: bool = True,
) -> Contour:
    """Keyhole-style contour opening upward around the origin.

    Traversal: left ray inward to ``-delta + i a``, connector down to
    ``-1/t``, lower arc ``(1/t) e^{is}`` for ``s`` from ``-pi`` to ``0``,
    connector up to ``delta + i a``, right ray outward.  The rays leave at 45
    degrees and are truncated where ``exp(-t Im lam) < 1e-14``.  Without rays
    only the arc and connectors remain.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    r = 1.0 / t
    left_top, right_top = -delta + 1j * a, delta + 1j * a
    segs: List[Segment] = []
    length = ray_length(t, a, r_max) if include_rays else 0.0
    if include_rays and length > 0:
        far = left_top + length * (-1 + 1j)
        segs.append(line("left_ray", far, left_top, panels, "end"))
    segs.append(line("left_link", left_top, -r + 0j, panels, "end"))
    segs.append(arc("arc", r, -np.pi, 0.0, panels))
    segs.append(line("right_link", r + 0j, right_top, panels, "start"))
    if include_rays and length > 0:
        segs.append(line("right_ray", right_top, right_top + length * (1 + 1j), panels, "start"))
    return Contour(segs, t, delta, a, r_max)


def build_closed_contour(t: float, delta: float, height: float, panels: int = 8) -> Contour:
    """Arc and connectors capped by a horizontal segment at ``Im = height``,
    traversed counterclockwise."""
    c = build_paper_contour(t, delta, height, panels=panels, include_rays=False)
    left_top, right_top = -delta + 1j * height, delta + 1j * height
    segs = c.segments + [line("cap", right_top, left_top, panels, "none")]
    return Contour(segs, t, delta, height, None)


def _integrate(contour: Contour, f: Callable[[complex], np.ndarray]):
    _, _, z, w = contour.nodes()
    acc = 0
    for zk, wk in zip(z, w):
        acc = acc + wk * f(zk)
    return acc / (2 * np.pi)


class QuadratureDivergence(RuntimeError):
    pass


def semigroup_via_contour(
    op,
    t: float,
    contour: Optional[Contour] = None,
    check: bool = True,
    drift_tol: float = 1e-6,
) -> np.ndarray:
    """``(1/2pi) int (i lam + At)^{-1} exp(i lam t) d lam`` by dense solves.

    With ``check=True`` the quadrature is repeated with doubled panels and a
    drift above ``drift_tol`` raises.  Drift and imaginary residue are
    measured against ``max(||result||, 1)``: the semigroup is a contraction,
    and for large ``t`` the exact result can be far below the rounding level
    of the integrand.
    """
    m = op.matrix if isinstance(op, SelfAdjointOperator) else np.atleast_2d(np.asarray(op, dtype=float))
    n = m.shape[0]
    eye = np.eye(n)
    contour = contour or build_paper_contour(t)

    def f(z):
        return np.exp(1j * z * t) * sla.solve(1j * z * eye + m, eye)

    val = _integrate(contour, f)
    if check:
        fine = _integrate(contour.refined(2), f)
        drift = np.abs(fine - val).max() / max(np.abs(fine).max(), 1.0)
        if drift > drift_tol:
            raise QuadratureDivergence(f"node-doubling drift {drift:.3e} exceeds {drift_tol}")
        val = fine
    if np.abs(val.imag).max() > 1e-6 * max(np.abs(val).max(), 1.0):
        raise QuadratureDivergence("reconstruction is not real; contour is not symmetric")
    return val.real


def low_frequency_profile_integral(
    A: SelfAdjointOperator,
    B: DampingOperator,
    data: CauchyData,
    t: float,
    contour: Contour,
    eps: float,
    tilde_A: Optional[SelfAdjointOperator] = None,
) -> np.ndarray:
    """Quadrature of ``(1/2pi) int phi~ e^{i lam t} (R(i lam)(i lam + B) u0 + R(i lam) u1) d lam``.

    ``phi~ = B^{-1/2} (1 - phi)(At) B^{1/2}`` keeps spectral components of
    ``At`` below ``eps``.
    """
    b = B.diagonal
    if not np.any(data.u0) and not np.any(data.u1):
        return np.zeros(A.n)
    At = tilde_A if tilde_A is not None else build_tilde_A(A, B)
    low = cutoff_projector(At, B, eps, low=True)

    def f(z):
        mu = 1j * z
        rhs = (mu + b) * data.u0 + data.u1
        return np.exp(1j * z * t) * sla.solve(pencil(A, B, mu), rhs)

    val = low @ _integrate(contour, f)
    return val.real


def residue_check_optimality(a: float, t: float, panels: int = 8) -> complex:
    """``(1/2pi) oint lam^2 e^{i lam t} (i lam + a)^{-2} d lam`` around ``lam = i a``.

    Equals ``2 a e^{-a t} - a^2 t e^{-a t}``.
    """
    if a <= 0 or t <= 0:
        raise ValueError("a and t must be positive")
    contour = build_closed_contour(t, delta=max(a, 1.0 / t), height=2 * a + 1.0 / t, panels=panels)
    return complex(_integrate(contour, lambda z: z**2 * np.exp(1j * z * t) / (1j * z + a) ** 2))


def residue_closed_form(a: float, t: float) -> float:
    return (2 * a - a**2 * t) * np.exp(-a * t)
