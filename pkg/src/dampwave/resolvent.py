"""Quadratic resolvent ``R(lam) = (lam^2 + B lam + A)^{-1}`` and its surveys.

Identities are checked against dense solves; lemma bounds are surveyed over
structured complex grids using exact singular values (power iteration on an
LU factorization for large problems).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
import scipy.sparse.linalg as spsl

from .operators import DampingOperator, SelfAdjointOperator
from .rates import RateFit, TimeSeries, fit_loglog


class SingularPencil(np.linalg.LinAlgError):
    def __init__(self, lam, residual):
        super().__init__(f"pencil singular at lambda={lam:.6g} (residual {residual:.3e})")
        self.lam = lam
        self.residual = residual


def _mat(A) -> np.ndarray:
    return A.matrix if isinstance(A, SelfAdjointOperator) else np.atleast_2d(np.asarray(A, dtype=float))


def _diag(B) -> np.ndarray:
    return B.diagonal if isinstance(B, DampingOperator) else np.atleast_1d(np.asarray(B, dtype=float))


def pencil(A, B, lam: complex) -> np.ndarray:
    a = _mat(A).astype(complex)
    a[np.diag_indices_from(a)] += lam**2 + lam * _diag(B)
    return a


@dataclass(frozen=True)
class LambdaGrid:
    points: np.ndarray
    region: str
    radii: Optional[np.ndarray] = None

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.points, dtype=complex))
        if np.any(p == 0):
            raise ValueError("lambda grid must not contain 0")
        object.__setattr__(self, "points", p)

    @classmethod
    def strip(cls, re_max: float, im_lo: float, im_hi: float, n_re: int, n_im: int, re_min: Optional[float] = None):
        """``re_min <= Re <= re_max``, ``im_lo <= |Im| <= im_hi`` (both signs),
        geometric in ``|Im|``."""
        re_min = -re_max if re_min is None else re_min
        re = np.linspace(re_min, re_max, n_re)
        im = np.geomspace(im_lo, im_hi, n_im // 2)
        im = np.concatenate([im, -im])
        return cls((re[:, None] + 1j * im[None, :]).ravel(), "strip")

    @classmethod
    def sector(cls, r_lo: float, r_hi: float, n_r: int, n_angle: int, half_angle: float = np.pi / 4):
        """``Re > |Im|``: angles strictly inside ``(-half_angle, half_angle)``."""
        r = np.geomspace(r_lo, r_hi, n_r)
        th = np.linspace(-half_angle, half_angle, n_angle + 2)[1:-1]
        return cls((r[:, None] * np.exp(1j * th)[None, :]).ravel(), "sector")

    @classmethod
    def annuli(cls, radii: Sequence[float], angles: Sequence[float]):
        r = np.asarray(radii, dtype=float)
        th = np.asarray(angles, dtype=float)
        return cls((r[:, None] * np.exp(1j * th)[None, :]).ravel(), "annuli", r)


def quadratic_resolvent(A, B, lam: complex, tol: float = 1e-10, columns: Optional[np.ndarray] = None) -> np.ndarray:
    """Dense ``R(lam)``, or only the given columns of it.

    The solve residual ``||P(lam) R - I||_max``, relative to
    ``||P||_max ||R||_max``, must stay below ``tol``; a condition proxy above
    ``1e13`` also counts as singular.
    """
    p = pencil(A, B, lam)
    n = p.shape[0]
    rhs = np.eye(n, dtype=complex) if columns is None else np.eye(n, dtype=complex)[:, columns]
    try:
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            r = sla.solve(p, rhs)
    except (np.linalg.LinAlgError, ValueError):
        raise SingularPencil(lam, np.inf)
    with np.errstate(all="ignore"):
        scale = np.abs(p).max() * np.abs(r).max()
        res = np.abs(p @ r - rhs).max() / scale
    if not np.isfinite(res) or res > tol or scale * n > 1e13:
        raise SingularPencil(lam, res)
    return r


def block_resolvent(A, B, lam: complex) -> Tuple[np.ndarray, float]:
    """``(lam - G)^{-1}`` assembled from ``R(lam)``; returns ``(matrix, residual)``.

    The residual is the larger of the two one-sided identity defects, relative
    to ``||lam - G|| * ||block||``.
    """
    if lam == 0:
        raise ValueError("lambda = 0 is excluded")
    a, b = _mat(A), _diag(B)
    n = a.shape[0]
    r = quadratic_resolvent(a, b, lam)
    blk = np.block([[r * (lam + b)[None, :], r], [-r @ a, lam * r]])
    g = np.zeros((2 * n, 2 * n))
    g[:n, n:] = np.eye(n)
    g[n:, :n] = -a
    g[n:, n:] = -np.diag(b)
    shifted = lam * np.eye(2 * n) - g
    eye = np.eye(2 * n)
    scale = np.abs(shifted).max() * np.abs(blk).max()
    res = max(np.abs(shifted @ blk - eye).max(), np.abs(blk @ shifted - eye).max()) / scale
    return blk, float(res)


@dataclass(frozen=True)
class IdentityResiduals:
    splitting: float
    conjugation: float
    commutation: float
    adjoint: float

    def max(self) -> float:
        return max(self.splitting, self.conjugation, self.commutation, self.adjoint)


def verify_heat_splitting(A, B, lam: complex) -> IdentityResiduals:
    """Residuals of the exact identities around ``S = (B lam + A)^{-1}``.

    * ``R = S - lam^2 S R``
    * ``S = B^{-1/2} (lam + At)^{-1} B^{-1/2}``
    * ``R S = S R``
    * ``R(lam)^* = R(conj(lam))``
    """
    a, b = _mat(A), _diag(B)
    n = a.shape[0]
    r = quadratic_resolvent(a, b, lam)
    lin = a.astype(complex) + np.diag(lam * b)
    s = sla.solve(lin, np.eye(n, dtype=complex))
    rs = np.abs(r).max()
    split = np.abs(r - (s - lam**2 * s @ r)).max() / max(rs, np.abs(s).max())
    bm = b**-0.5
    at = bm[:, None] * a * bm[None, :]
    at = 0.5 * (at + at.T)
    s2 = bm[:, None] * sla.solve(lam * np.eye(n) + at, np.eye(n, dtype=complex)) * bm[None, :]
    conj = np.abs(s - s2).max() / np.abs(s).max()
    comm = np.abs(r @ s - s @ r).max() / (rs * np.abs(s).max() * n)
    adj = np.abs(r.conj().T - quadratic_resolvent(a, b, np.conj(lam))).max() / rs
    return IdentityResiduals(float(split), float(conj), float(comm), float(adj))


def operator_norm(m: np.ndarray) -> float:
    return float(sla.svdvals(m)[0])


def lu_operator_norm(p: np.ndarray, tol: float = 1e-6, maxiter: int = 500, seed: int = 0) -> float:
    """``||P^{-1}||_2`` by power iteration on ``(P^{-1})^* P^{-1}`` with one LU."""
    lu = sla.lu_factor(p, check_finite=False)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(p.shape[0]) + 0j
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(maxiter):
        y = sla.lu_solve(lu, x)
        z = sla.lu_solve(lu, y, trans=2)
        est = np.sqrt(np.linalg.norm(z))
        x = z / np.linalg.norm(z)
        if abs(est - prev) <= tol * est:
            break
        prev = est
    return float(est)


@dataclass
class BoundSurvey:
    lemma: str
    lam: np.ndarray
    measured: np.ndarray
    bound: np.ndarray
    explicit: bool
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def margin(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.measured > 0, self.bound / self.measured, np.inf)

    @property
    def min_margin(self) -> float:
        return float(self.margin.min())

    @property
    def passes(self) -> bool:
        return self.min_margin >= 1.0

    @property
    def constant(self) -> float:
        """Empirical constant ``max measured / shape`` for big-O surveys."""
        return float((self.measured / self.bound).max())

    def table(self) -> Dict[str, np.ndarray]:
        k = self.lam.size
        return {
            "lemma_id": np.array([self.lemma] * k),
            "re_lambda": self.lam.real,
            "im_lambda": self.lam.imag,
            "measured": self.measured,
            "bound": self.bound,
            "margin": self.margin,
        }


class _Weights:
    """Energy weights for the block resolvent norms."""

    def __init__(self, a: np.ndarray):
        w, q = np.linalg.eigh(a)
        w = np.clip(w, 0, None)
        self.root = (q * np.sqrt(w)) @ q.T
        self.iroot = (q / np.sqrt(w)) @ q.T if w.min() > 0 else None
        self.root1 = (q * np.sqrt(1 + w)) @ q.T
        self.iroot1 = (q / np.sqrt(1 + w)) @ q.T


def _shape(lemma: str, lam: complex, rnorm: float) -> float:
    m = abs(lam)
    im = abs(lam.imag)
    if lemma == "h_to_h1":
        return np.sqrt(rnorm) + (np.sqrt(m) + m) * rnorm
    if lemma == "h1_to_h1":
        return (m**-0.5 + 1) * np.sqrt(rnorm) + (1 + m) * rnorm + 1 / m
    if lemma in ("energy_h0_h0", "energy_h_h"):
        return 1 / im + 1
    if lemma == "energy_h_h0":
        return (1 + m) * im**-0.5 + (np.sqrt(m) + m**2) / im
    raise ValueError(f"unknown lemma {lemma!r}")


EXPLICIT_LEMMAS = ("strip_bound", "sector_bound")
BIG_O_LEMMAS = ("h_to_h1", "h1_to_h1", "energy_h0_h0", "energy_h_h0", "energy_h_h")


def survey_lemma_bounds(A, B, grid: LambdaGrid, lemma: str, delta: float = 0.1) -> BoundSurvey:
    """Measure the relevant resolvent norm at every grid point.

    Explicit lemmas (``strip_bound``: ``1/(|Im| (c + 2 Re))``, ``sector_bound``:
    ``1/(c Re)``) compare against their constants.  Big-O lemmas record the
    shape function; their empirical constant is judged by refinement
    stability.  A singular pencil inside the claimed region raises.
    """
    a, b = _mat(A), _diag(B)
    c = float(b.min())
    n = a.shape[0]
    weights = _Weights(a) if lemma not in EXPLICIT_LEMMAS else None
    if lemma == "h1_to_h1" and weights.iroot is None:
        raise ValueError("H1 -> H1 survey needs A > 0 (Dirichlet)")
    measured, bound = [], []
    for lam in grid.points:
        if lemma == "strip_bound":
            if not (lam.real > -c / 2 and lam.imag != 0):
                raise ValueError(f"lambda {lam} outside the strip region")
            r = quadratic_resolvent(a, b, lam)
            measured.append(operator_norm(r))
            bound.append(1.0 / (abs(lam.imag) * (c + 2 * lam.real)))
            continue
        if lemma == "sector_bound":
            if not lam.real > abs(lam.imag):
                raise ValueError(f"lambda {lam} outside the sector Re > |Im|")
            r = quadratic_resolvent(a, b, lam)
            measured.append(operator_norm(r))
            bound.append(1.0 / (c * lam.real))
            continue
        r = quadratic_resolvent(a, b, lam)
        rn = operator_norm(r)
        if lemma == "h_to_h1":
            val = operator_norm(weights.root @ r)
        elif lemma == "h1_to_h1":
            val = operator_norm(weights.root @ (r * (lam + b)[None, :]) @ weights.iroot)
        else:
            blk = np.block([[r * (lam + b)[None, :], r], [-r @ a, lam * r]])
            eye = np.eye(n)
            w0 = sla.block_diag(weights.root, eye)
            wh = sla.block_diag(weights.root1, eye)
            whi = sla.block_diag(weights.iroot1, eye)
            if lemma == "energy_h0_h0":
                if weights.iroot is None:
                    raise ValueError("H0 -> H0 survey needs A > 0 (Dirichlet)")
                w0i = sla.block_diag(weights.iroot, eye)
                val = operator_norm(w0 @ blk @ w0i)
            elif lemma == "energy_h_h0":
                val = operator_norm(w0 @ blk @ whi)
            elif lemma == "energy_h_h":
                val = operator_norm(wh @ blk @ whi)
            else:
                raise ValueError(f"unknown lemma {lemma!r}")
        measured.append(val)
        bound.append(_shape(lemma, lam, rn))
    return BoundSurvey(lemma, grid.points.copy(), np.asarray(measured), np.asarray(bound), lemma in EXPLICIT_LEMMAS)


def refinement_drift(coarse: BoundSurvey, fine: BoundSurvey) -> float:
    """Relative change of the empirical big-O constant under refinement."""
    c0, c1 = coarse.constant, fine.constant
    return abs(c1 - c0) / c0


@dataclass
class CutoffSurvey:
    radii: np.ndarray
    sup_norm: np.ndarray
    fit: Optional[RateFit]
    log_fit_residual: float
    power_fit_residual: float
    survey: BoundSurvey


def _column_solver(a: np.ndarray, c: np.ndarray, dense_limit: int):
    """Solver for selected columns of ``R(lam)``.

    Above ``dense_limit`` unknowns the stencil matrix is factorized in sparse
    form, which keeps near-origin surveys on large 2-D grids affordable.
    """
    n = a.shape[0]
    if n <= dense_limit:
        return lambda lam, cols: quadratic_resolvent(a, c, lam, columns=cols)
    sa = sps.csc_matrix(a)

    def solve(lam, cols):
        p = (sa + sps.diags(lam**2 + lam * c)).astype(complex).tocsc()
        rhs = np.zeros((n, len(cols)), dtype=complex)
        rhs[cols, np.arange(len(cols))] = 1.0
        x = spsl.splu(p).solve(rhs)
        res = np.abs(p @ x - rhs).max() / (abs(p).max() * np.abs(x).max())
        if not np.isfinite(res) or res > 1e-10:
            raise SingularPencil(lam, res)
        return x

    return solve


def cutoff_resolvent_survey(
    P,
    c,
    chi: np.ndarray,
    radii: Sequence[float],
    angles: Sequence[float],
    dense_limit: int = 1024,
) -> CutoffSurvey:
    """``||chi R(lam) chi||`` on near-origin annuli with a growth-exponent fit.

    ``chi`` is a nonnegative weight vector; only columns in its support are
    solved for.  Besides the power-law fit of the per-radius sup, a fit of
    ``log sup`` against ``log log(1/|lam|)`` is made; its residual is compared
    with the power-law residual to tell logarithmic growth from a power law.
    """
    if np.any((np.asarray(radii) <= 0) | (np.asarray(radii) >= 1)):
        raise ValueError("annulus radii must lie in (0, 1)")
    a, cd = _mat(P), _diag(c)
    chi = np.asarray(chi, dtype=float)
    supp = np.flatnonzero(chi)
    solve = _column_solver(a, cd, dense_limit)
    lam_all, meas, sup = [], [], []
    for r in radii:
        vals = []
        for th in angles:
            lam = r * np.exp(1j * th)
            if supp.size == 0:
                v = 0.0
            else:
                cols = solve(lam, supp)
                block = chi[supp][:, None] * cols[supp, :] * chi[supp][None, :]
                v = operator_norm(block)
            vals.append(v)
            lam_all.append(lam)
            meas.append(v)
        sup.append(max(vals))
    sup = np.asarray(sup)
    radii = np.asarray(radii, dtype=float)
    survey = BoundSurvey("cutoff", np.asarray(lam_all), np.asarray(meas), np.full(len(meas), np.inf), False)
    fit = None
    log_res = power_res = float("nan")
    if np.all(sup > 0) and radii.size >= 8:
        order = np.argsort(radii)
        fit = fit_loglog(TimeSeries(radii[order], sup[order], "cutoff norm"))
        power_res = fit.residual
        x = np.log(np.log(1 / radii))
        coef = np.polyfit(x, np.log(sup), 1)
        log_res = float(np.sqrt(np.mean((np.log(sup) - np.polyval(coef, x)) ** 2)))
    return CutoffSurvey(radii, sup, fit, log_res, power_res, survey)


def local_exponents(survey: "CutoffSurvey") -> np.ndarray:
    """Slopes between consecutive radii, ordered by increasing radius."""
    order = np.argsort(survey.radii)
    r, s = survey.radii[order], survey.sup_norm[order]
    return np.diff(np.log(s)) / np.diff(np.log(r))


def full_resolvent_norm(A, B, lam: complex) -> float:
    p = pencil(A, B, lam)
    if p.shape[0] <= 512:
        return operator_norm(sla.inv(p))
    return lu_operator_norm(p)


@dataclass
class GCCResolventReport:
    near_origin: BoundSurvey
    middle: BoundSurvey
    near_constant: float
    middle_max: float
    failures: list
    spectral_abscissa: float = float("nan")
    unresolved_roots: int = 0

    @property
    def passes(self) -> bool:
        return not self.failures and np.isfinite(self.near_constant) and np.isfinite(self.middle_max)


def gcc_resolvent_survey(
    P,
    a,
    radii: Sequence[float] = tuple(np.geomspace(1e-3, 1e-1, 9)),
    angles: Sequence[float] = (-np.pi / 4, 0.0, np.pi / 4, 0.45 * np.pi, -0.45 * np.pi),
    taus: Sequence[float] = tuple(np.linspace(0.1, 3.0, 30)),
    growth_cap: float = 1e8,
    spectral_check: bool = True,
    band: Optional[float] = None,
) -> GCCResolventReport:
    """Low- and middle-frequency resolvent survey for vanishing damping.

    Near the origin records ``|lam| ||R(lam)||`` on right half-plane annuli;
    on the imaginary axis records ``||R(i tau)||``.  With ``spectral_check``
    the pencil roots are computed from the companion matrix and any root with
    positive real part and ``|Im| <= band`` (default: the largest ``tau``) is
    a point where the resolvent fails to exist.  Unstable roots above the band
    sit at grid-scale frequencies where the discrete rays stall; they are
    counted in ``unresolved_roots`` but not treated as failures.  A
    singular pencil, or a norm above ``growth_cap``, is logged as a
    counterexample candidate.
    """
    pm, ad = _mat(P), _diag(a)
    failures = []
    abscissa = float("nan")
    unresolved = 0
    if spectral_check:
        n = pm.shape[0]
        comp = np.zeros((2 * n, 2 * n))
        comp[:n, n:] = np.eye(n)
        comp[n:, :n] = -pm
        comp[n:, n:] = -np.diag(ad)
        roots = np.linalg.eigvals(comp)
        band = max(taus) if band is None else float(band)
        scale = max(1.0, np.abs(roots).max())
        unstable = roots.real > 1e-9 * scale
        inside = np.abs(roots.imag) <= band
        abscissa = float(roots.real[inside].max())
        unresolved = int((unstable & ~inside).sum())
        for mu in roots[unstable & inside]:
            failures.append({"lambda": complex(mu), "value": float("inf"), "kind": "pencil root in Re > 0"})
    lam_n, val_n = [], []
    for r in radii:
        for th in angles:
            lam = r * np.exp(1j * th)
            try:
                v = abs(lam) * full_resolvent_norm(pm, ad, lam)
            except np.linalg.LinAlgError:
                v = np.inf
            if not np.isfinite(v) or v > growth_cap:
                failures.append({"lambda": complex(lam), "value": float(v)})
            lam_n.append(lam)
            val_n.append(v)
    lam_m, val_m = [], []
    for tau in taus:
        for lam in (1j * tau, -1j * tau):
            try:
                v = full_resolvent_norm(pm, ad, lam)
            except np.linalg.LinAlgError:
                v = np.inf
            if not np.isfinite(v) or v > growth_cap:
                failures.append({"lambda": complex(lam), "value": float(v)})
            lam_m.append(lam)
            val_m.append(v)
    near = BoundSurvey("gcc_low", np.asarray(lam_n), np.asarray(val_n), np.full(len(val_n), growth_cap), False)
    mid = BoundSurvey("gcc_middle", np.asarray(lam_m), np.asarray(val_m), np.full(len(val_m), growth_cap), False)
    return GCCResolventReport(near, mid, float(np.max(val_n)), float(np.max(val_m)), failures, abscissa, unresolved)


def cauchy_integral_check(A, B, center: complex, radius: float, nodes: int = 64) -> float:
    """Relative error of the trapezoid Cauchy integral of ``R`` at ``center``."""
    th = 2 * np.pi * np.arange(nodes) / nodes
    acc = 0
    for t in th:
        acc = acc + quadratic_resolvent(A, B, center + radius * np.exp(1j * t))
    approx = acc / nodes
    exact = quadratic_resolvent(A, B, center)
    return float(np.abs(approx - exact).max() / np.abs(exact).max())
