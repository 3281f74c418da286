"""Discrete operators, spectral calculus and grid norms.

Everything is dense: the operators of interest (fractional powers, complex
resolvents, spectral cutoffs) are full matrices anyway, and the unknown count
is capped so that a dense eigendecomposition stays affordable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as sla

MAX_UNKNOWNS = 8192

ArrayLike = Union[np.ndarray, float]


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on a box of side ``length`` centred at the origin.

    Periodic grids hold ``n`` nodes with spacing ``L / n``; Dirichlet grids
    hold the ``n`` interior nodes of ``n + 1`` cells.
    """

    dim: int
    points_per_axis: int
    length: float
    boundary: str = "periodic"

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.points_per_axis < 2:
            raise ValueError("need at least two points per axis")
        if self.length <= 0:
            raise ValueError("domain length must be positive")
        if self.boundary not in ("periodic", "dirichlet"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.size > MAX_UNKNOWNS:
            raise ValueError(
                f"{self.size} unknowns exceeds the dense cap of {MAX_UNKNOWNS}"
            )

    @property
    def h(self) -> float:
        cells = self.points_per_axis + (self.boundary == "dirichlet")
        return self.length / cells

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        n, h = self.points_per_axis, self.h
        offset = 1.0 if self.boundary == "dirichlet" else 0.0
        return -0.5 * self.length + (np.arange(n) + offset) * h

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(size, dim)``, C-ordered."""
        ax = self.axis()
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""

    def __init__(self, eigenvalues: np.ndarray, eigenvectors: np.ndarray):
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors

    def reconstruct(self, f: Optional[Callable] = None) -> np.ndarray:
        lam = self.eigenvalues if f is None else f(self.eigenvalues)
        q = self.eigenvectors
        return (q * lam) @ q.T


class SelfAdjointOperator:
    """Dense real symmetric matrix tied to a grid, with a lazily cached
    eigendecomposition guarded by a lock."""

    def __init__(self, matrix: np.ndarray, grid: Optional[Grid] = None):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        scale = max(np.abs(m).max(), np.finfo(float).tiny)
        asym = np.abs(m - m.T).max()
        if asym > 1e-12 * scale:
            raise ValueError(f"matrix not symmetric: max |M - M^T| = {asym:.3e}")
        if grid is not None and grid.size != m.shape[0]:
            raise ValueError(
                f"matrix size {m.shape[0]} does not match grid size {grid.size}"
            )
        m.setflags(write=False)
        self.matrix = m
        self.grid = grid
        self._spectrum: Optional[SpectralDecomposition] = None
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> SpectralDecomposition:
        if self._spectrum is None:
            with self._lock:
                if self._spectrum is None:
                    lam, q = sla.eigh(self.matrix)
                    self._spectrum = SpectralDecomposition(lam, q)
        return self._spectrum

    def is_psd(self, rtol: float = 1e-10) -> bool:
        lam = self.spectrum.eigenvalues
        return bool(lam[0] >= -rtol * max(np.abs(lam).max(), 1.0))


class DampingOperator:
    """Diagonal multiplication operator ``B = diag(b)``.

    Nonnegative values are required unless ``indefinite=True``, which admits
    sign-changing damping for perturbation experiments.
    """

    def __init__(
        self,
        diagonal: ArrayLike,
        lower_bound: Optional[float] = None,
        indefinite: bool = False,
    ):
        d = np.atleast_1d(np.asarray(diagonal, dtype=float)).copy()
        if not np.all(np.isfinite(d)):
            raise ValueError("damping values must be finite")
        if not indefinite and d.min() < 0:
            raise ValueError(
                f"negative damping {d.min():.3e} at index {int(d.argmin())}"
            )
        c = float(d.min()) if lower_bound is None else float(lower_bound)
        if c > 0 and d.min() < c:
            raise ValueError(f"min damping {d.min():.3e} below lower bound {c:.3e}")
        d.setflags(write=False)
        self.diagonal = d
        self.lower_bound = c
        self.indefinite = indefinite

    @property
    def n(self) -> int:
        return self.diagonal.size

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)

    def power(self, s: float) -> np.ndarray:
        """Diagonal of ``B**s``."""
        if s < 0 and np.any(self.diagonal <= 0):
            i = int(np.argmin(self.diagonal))
            raise ValueError(
                f"B^{s} undefined: damping value {self.diagonal[i]:.3e} at index {i}"
            )
        if np.any(self.diagonal < 0):
            raise ValueError("fractional power of indefinite damping")
        return self.diagonal**s


def _face_coefficients(grid: Grid, g: Callable, axis: int):
    """Sample ``g`` at the faces crossing ``axis``.

    Returns the face values (node grid shape, one longer along ``axis`` for
    Dirichlet grids) and the face points.  Entry ``k`` is the face on the low
    side of node ``k`` (Dirichlet) or between nodes ``k`` and ``k+1``
    (periodic).
    """
    n, h = grid.points_per_axis, grid.h
    ax = grid.axis()
    if grid.boundary == "periodic":
        face_axis = ax + 0.5 * h
    else:
        face_axis = np.concatenate([ax - 0.5 * h, [ax[-1] + 0.5 * h]])
    axes = [ax] * grid.dim
    axes[axis] = face_axis
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = np.asarray(g(pts), dtype=float)
    if vals.ndim == 2:
        vals = vals[:, axis]
    shape = [n] * grid.dim
    shape[axis] = len(face_axis)
    return vals.reshape(shape), pts


def build_divergence_form(
    grid: Grid, g: Callable, ellipticity: float = 1e6
) -> SelfAdjointOperator:
    """Flux-form finite-difference matrix of ``-div(g grad)``.

    ``g`` maps points of shape ``(m, dim)`` to either scalar values (isotropic
    metric) or an ``(m, dim)`` array (diagonal metric).  Assembly as
    ``sum_axes D^T diag(g_face) D / h^2`` makes the matrix exactly symmetric.
    """
    n, h, d = grid.points_per_axis, grid.h, grid.dim
    idx = np.arange(grid.size).reshape([n] * d)
    rows, cols, vals = [], [], []
    for axis in range(d):
        gf, pts = _face_coefficients(grid, g, axis)
        bad = ~np.isfinite(gf) | (gf < 1.0 / ellipticity) | (gf > ellipticity)
        if bad.any():
            k = int(np.flatnonzero(bad.ravel())[0])
            raise ValueError(
                f"coefficient not uniformly elliptic: g={gf.ravel()[k]:.3e} "
                f"at x={pts[k]} (allowed range [{1 / ellipticity:.1e}, {ellipticity:.1e}])"
            )
        if grid.boundary == "periodic":
            left = idx
            right = np.roll(idx, -1, axis=axis)
            w = gf
        else:
            pad = [(0, 0)] * d
            pad[axis] = (1, 1)
            ext = np.pad(idx, pad, constant_values=-1)
            sl_lo = [slice(None)] * d
            sl_hi = [slice(None)] * d
            sl_lo[axis] = slice(0, n + 1)
            sl_hi[axis] = slice(1, n + 2)
            left, right, w = ext[tuple(sl_lo)], ext[tuple(sl_hi)], gf
        left, right, w = left.ravel(), right.ravel(), w.ravel() / h**2
        for a, b in ((left, right), (right, left)):
            keep = (a >= 0) & (b >= 0)
            rows.append(a[keep])
            cols.append(b[keep])
            vals.append(-w[keep])
        for a in (left, right):
            keep = a >= 0
            rows.append(a[keep])
            cols.append(a[keep])
            vals.append(w[keep])
    m = np.zeros((grid.size, grid.size))
    np.add.at(m, (np.concatenate(rows), np.concatenate(cols)), np.concatenate(vals))
    return SelfAdjointOperator(m, grid)


def _as_operator(op) -> SelfAdjointOperator:
    if isinstance(op, SelfAdjointOperator):
        return op
    return SelfAdjointOperator(np.atleast_2d(np.asarray(op, dtype=float)))


def spectral_decompose(op) -> SpectralDecomposition:
    """Cached eigendecomposition of a symmetric operator."""
    return _as_operator(op).spectrum


def apply_spectral_function(op, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Return ``Q f(Lambda) Q^T``.

    ``f`` must be vectorized; a non-finite value on the spectrum raises and
    names the offending eigenvalue.
    """
    spec = spectral_decompose(op)
    with np.errstate(all="ignore"):
        fl = np.asarray(f(spec.eigenvalues), dtype=float)
    if fl.shape != spec.eigenvalues.shape:
        fl = np.broadcast_to(fl, spec.eigenvalues.shape)
    bad = ~np.isfinite(fl)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(
            f"spectral function not finite at eigenvalue {spec.eigenvalues[i]:.6e}"
        )
    q = spec.eigenvectors
    return (q * fl) @ q.T


def psd_sqrt(x: np.ndarray) -> np.ndarray:
    """Square root that clips roundoff-negative eigenvalues to zero."""
    return np.sqrt(np.clip(x, 0.0, None))


def step_cutoff(eps: float) -> Callable[[np.ndarray], np.ndarray]:
    """Indicator of ``[eps, inf)``; its complement is ``1 - step_cutoff``."""
    return lambda x: (np.asarray(x) >= eps).astype(float)


def build_tilde_A(A, B: DampingOperator) -> SelfAdjointOperator:
    """``B^{-1/2} A B^{-1/2}``, symmetrized after assembly."""
    A = _as_operator(A)
    if B.n != A.n:
        raise ValueError(f"size mismatch: A is {A.n}, B is {B.n}")
    if B.lower_bound <= 0 or B.diagonal.min() <= 0:
        raise ValueError("tilde A needs strictly positive damping (c > 0)")
    s = B.diagonal**-0.5
    m = s[:, None] * A.matrix * s[None, :]
    return SelfAdjointOperator(0.5 * (m + m.T), A.grid)


def _quad(A, u: np.ndarray) -> float:
    m = A.matrix if isinstance(A, SelfAdjointOperator) else np.asarray(A)
    return float(max(np.real(np.vdot(u, m @ u)), 0.0))


def discrete_norm(v: np.ndarray, which: str, grid: Grid, A=None) -> float:
    """Grid norms weighted by the cell measure ``h^d``.

    ``which`` is one of L1, L2, Linf, H1, energy0, energyH.  The energy norms
    take a stacked state ``(u, v)`` of length ``2n``.
    """
    v = np.asarray(v)
    n, w = grid.size, grid.cell_volume
    if which in ("energy0", "energyH"):
        if v.shape != (2 * n,):
            raise ValueError(f"state length {v.shape} does not match 2n = {2 * n}")
        if A is None:
            raise ValueError("energy norms need A")
        u, ut = v[:n], v[n:]
        sq = w * (_quad(A, u) + np.vdot(ut, ut).real)
        if which == "energyH":
            sq += w * np.vdot(u, u).real
        return float(np.sqrt(sq))
    if v.shape != (n,):
        raise ValueError(f"vector length {v.shape} does not match grid size {n}")
    if which == "L1":
        return float(w * np.abs(v).sum())
    if which == "L2":
        return float(np.sqrt(w * np.vdot(v, v).real))
    if which == "Linf":
        return float(np.abs(v).max())
    if which == "H1":
        if A is None:
            raise ValueError("H1 norm needs A")
        return float(np.sqrt(w * _quad(A, v)))
    raise ValueError(f"unknown norm {which!r}")
