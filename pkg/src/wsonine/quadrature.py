"""Singular-integral machinery.

Three tools, all serving integrals whose singular factor is known a priori:

* Gauss-Jacobi rules for integrals against (1-z)^(a0-1) z^(-a0) on (0,1),
  built by Golub-Welsch from the three-term recurrence;
* closed-form product-integration weights for convolving a piecewise-linear
  interpolant with a pure power |t* - s|^(-beta);
* composite Gauss-Legendre on geometrically graded panels for integrands
  with a log or power (< 1) singularity at one end.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NumericalError, ValidationError
from .kernels import gamma

DEFAULT_JACOBI_N = 32
DEFAULT_PANEL_LEVELS = 60
DEFAULT_PANEL_NODES = 16


@dataclass(frozen=True)
class JacobiRule:
    """Nodes/weights for int_0^1 (1-z)^(a0-1) z^(-a0) phi(z) dz."""

    alpha0: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    def integrate(self, phi) -> float:
        return float(np.dot(self.weights, phi(self.nodes)))


def jacobi_rule(alpha0: float, n: int) -> JacobiRule:
    """Golub-Welsch construction for Jacobi parameters (alpha0-1, -alpha0)
    mapped from [-1,1] to [0,1]; total mass is kappa(alpha0)."""
    if not 0.0 < alpha0 < 1.0:
        raise ValidationError(f"alpha0 must lie in (0,1), got {alpha0}")
    if n < 1:
        raise ValidationError("need at least one node")
    a = alpha0 - 1.0
    b = -alpha0
    diag, off, mass = _jacobi_recurrence(n, a, b)
    if n == 1:
        x = np.array([diag[0]])
        w = np.array([mass])
    else:
        try:
            x, v = eigh_tridiagonal(diag, off)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise NumericalError(f"Jacobi eigensolver failed for n={n}") from exc
        w = mass * v[0, :] ** 2
    z = 0.5 * (x + 1.0)
    # the affine map has unit Jacobian against this weight: a+b+1 = 0
    order = np.argsort(z)
    return JacobiRule(alpha0, z[order], w[order])


def _jacobi_recurrence(n, a, b):
    """Recurrence coefficients on [-1,1] for weight (1-x)^a (1+x)^b (Gautschi)."""
    diag = np.zeros(n)
    off = np.zeros(max(n - 1, 0))
    apb2 = 2.0 + a + b
    diag[0] = (b - a) / apb2
    mass = 2.0 ** (a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0)
    if n > 1:
        off[0] = np.sqrt(4.0 * (a + 1.0) * (b + 1.0) / ((apb2 + 1.0) * apb2 * apb2))
    for i in range(1, n):
        apb2 = 2.0 * (i + 1) + a + b
        diag[i] = (b * b - a * a) / ((apb2 - 2.0) * apb2)
        if i < n - 1:
            k = i + 1
            off[i] = np.sqrt(4.0 * k * (k + a) * (k + b) * (k + a + b)
                             / ((apb2 * apb2 - 1.0) * apb2 * apb2))
    return diag, off, mass


# ---------------------------------------------------------------- meshes

@dataclass(frozen=True)
class Mesh:
    """Graded time grid t_i = b (i/N)^r, i = 0..N."""

    b: float
    n: int
    r: float = 1.0

    def __post_init__(self):
        if self.b <= 0 or self.n < 1 or self.r < 1.0:
            raise ValidationError(f"bad mesh (b={self.b}, N={self.n}, r={self.r})")

    @property
    def points(self) -> np.ndarray:
        i = np.arange(self.n + 1, dtype=float)
        return self.b * (i / self.n) ** self.r

    @property
    def tau(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def is_uniform(self) -> bool:
        return self.r == 1.0

    def refined(self, factor: int = 2) -> "Mesh":
        return Mesh(self.b, self.n * factor, self.r)


def default_grading(alpha0: float) -> float:
    """r = max(1, 2/alpha0), the standard choice for t^(alpha0-1) behavior."""
    return max(1.0, 2.0 / alpha0)


# --------------------------------------------- product-integration weights

def power_conv_weights(beta: float, mesh: Mesh, i: int,
                       singular_end: str = "right") -> np.ndarray:
    """Weights {w_ij, j=0..i} with sum_j w_ij phi(t_j) equal to

        int_0^{t_i} (t_i - s)^(-beta) phihat(s) ds   (singular_end="right")
        int_0^{t_i} s^(-beta)        phihat(s) ds   (singular_end="left")

    exactly for the piecewise-linear interpolant phihat of phi on the mesh.
    """
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"beta must lie in (0,1), got {beta}")
    if not 1 <= i <= mesh.n:
        raise ValidationError(f"step index {i} outside 1..{mesh.n}")
    t = mesh.points[: i + 1]
    ti = t[i]
    lo, hi = t[:-1], t[1:]
    h = hi - lo
    if singular_end == "right":
        # substitute u = t_i - s per panel
        ua, ub = ti - hi, ti - lo
        m0 = (ub ** (1.0 - beta) - ua ** (1.0 - beta)) / (1.0 - beta)
        m1 = ti * m0 - (ub ** (2.0 - beta) - ua ** (2.0 - beta)) / (2.0 - beta)
    elif singular_end == "left":
        m0 = (hi ** (1.0 - beta) - lo ** (1.0 - beta)) / (1.0 - beta)
        m1 = (hi ** (2.0 - beta) - lo ** (2.0 - beta)) / (2.0 - beta)
    else:
        raise ValidationError("singular_end must be 'left' or 'right'")
    w = np.zeros(i + 1)
    np.add.at(w, np.arange(i), (hi * m0 - m1) / h)
    np.add.at(w, np.arange(1, i + 1), (m1 - lo * m0) / h)
    return w


def power_moment(beta: float, upper: float) -> float:
    """int_0^T s^(-beta) ds, the row-sum identity for the weights above."""
    return upper ** (1.0 - beta) / (1.0 - beta)


# ------------------------------------------------- graded panel quadrature

@lru_cache(maxsize=16)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def graded_nodes(a: float, b: float, singular_end: str = "left",
                 levels: int = DEFAULT_PANEL_LEVELS,
                 nodes_per_panel: int = DEFAULT_PANEL_NODES):
    """Points/weights of the composite graded Gauss-Legendre rule used by
    graded_panel_quad, for callers that integrate several integrands at once."""
    if not a < b:
        raise ValidationError(f"empty interval [{a}, {b}]")
    if singular_end not in ("left", "right"):
        raise ValidationError("singular_end must be 'left' or 'right'")
    x, w = _leggauss(nodes_per_panel)
    width = b - a
    sp = abs(a) if singular_end == "left" else abs(b)
    if sp > 0.0:
        eps = np.finfo(float).eps
        cap = int(np.floor(np.log2(width / (500.0 * eps * sp))))
        levels = max(1, min(levels, cap))
    offs = width * 0.5 ** np.arange(levels + 1)
    edges = np.concatenate((offs, [0.0]))
    if singular_end == "left":
        lo, hi = a + edges[1:], a + edges[:-1]
    else:
        lo, hi = b - edges[:-1], b - edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def graded_panel_quad(fn, a: float, b: float, singular_end: str = "left",
                      levels: int = DEFAULT_PANEL_LEVELS,
                      nodes_per_panel: int = DEFAULT_PANEL_NODES) -> float:
    """Composite Gauss-Legendre over panels graded (ratio 1/2) toward the
    singular end; the innermost sliver uses the same open rule, so the
    integrand is never evaluated at the endpoint itself.

    fn must accept a numpy array of points and return finite values at all
    interior nodes.
    """
    pts, wts = graded_nodes(a, b, singular_end, levels, nodes_per_panel)
    vals = np.asarray(fn(pts), dtype=float)
    if vals.shape != pts.shape:
        vals = np.broadcast_to(vals, pts.shape)
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)][0]
        raise NumericalError(f"non-finite integrand value at {bad!r}")
    return float(np.dot(wts, vals))
