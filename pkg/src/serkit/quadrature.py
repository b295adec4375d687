"""Integrals of radial functions over the facet simplices of a cone fan.

Every quantity computed here has the form

    sum over cones of  ∫_T  b ‖y‖^{-N} Ψ(‖y‖) dA(y)

where ``T`` is the cone's facet simplex lying on the hyperplane ``a @ y = b``.
The factor ``b ‖y‖^{-N} dA`` is the solid angle subtended by ``dA`` at the
origin, so ``Ψ(r̄)`` is weighted by solid angle exactly as in the
hyperspherical form of the error integral.

Simplex integrals of radial functions are reduced one dimension at a time:
around the foot point ``c`` of the centre on the simplex's hull, the
simplex is a signed sum of cones over its own facets, and the radial
integral along each ray is folded into a new radial function on the
lower-dimensional facet.  Zero-dimensional simplices are point
evaluations.  For the Gaussian tail the innermost fold has a closed form
in three dimensions; the solid-angle indicator used by the representing
function has one in any dimension.
"""

from __future__ import annotations

import numpy as np
from scipy import special

__all__ = [
    "QuadratureError",
    "facet_integral",
]

GL_NODES = 20
_GX, _GW = np.polynomial.legendre.leggauss(GL_NODES)
_GX = 0.5 * (_GX + 1.0)
_GW = 0.5 * _GW


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails to reach its tolerance."""


def _bcast(p: np.ndarray, ndim: int) -> np.ndarray:
    """Reshape a per-parameter vector (K,) to broadcast against (K, ...)."""
    return p.reshape(p.shape + (1,) * (ndim - 1))


# Radial functions --------------------------------------------------------
#
# A radial function carries a leading parameter axis of length K (SNR
# values or u values).  ``kinks`` lists radii where it is not smooth and
# ``scales`` lists length scales worth resolving; both are (K, n) arrays
# padded with nan.


class _Lifted:
    """``q -> h q^{-m} Phi(q)``: the fold of a radial function onto a facet."""

    def __init__(self, phi, h: float, m: int) -> None:
        self.phi = phi
        self.h = h
        self.m = m
        self.kinks = phi.kinks
        self.scales = phi.scales

    def __call__(self, q: np.ndarray) -> np.ndarray:
        return self.h * q ** (-self.m) * self.phi(q)


_VINV = np.linalg.inv(np.polynomial.legendre.legvander(2.0 * _GX - 1.0, GL_NODES - 1))


class _NumericPhi:
    """``s -> ∫_0^s F(sqrt(h^2 + t^2)) t^{m-1} dt`` for ``0 <= s <= smax``.

    The integrand is sampled once at Gauss-Legendre nodes on panels graded
    geometrically from ``h`` and split at kinks and length scales.  The
    Legendre interpolant of each panel is integrated exactly, so later
    evaluations cost one short series sum.
    """

    def __init__(self, f, h: float, m: int, smax: float) -> None:
        self.h = h
        with np.errstate(invalid="ignore"):
            k = np.sqrt(f.kinks**2 - h * h)
        self.kinks = np.where(f.kinks > h, k, np.nan)
        self.scales = f.scales
        kdim = self.kinks.shape[0]
        self.smax = smax = max(smax, 1e-300)
        jmax = int(np.ceil(np.log2(max(smax, h) / h))) + 1
        geo = h * 2.0 ** np.arange(-5, jmax + 1)
        sc = (self.scales[:, :, None] * np.array([0.25, 0.5, 1.0, 2.0, 4.0])).reshape(kdim, -1)
        br = np.concatenate([np.broadcast_to(geo, (kdim, geo.size)), sc, self.kinks], axis=1)
        br = np.where(np.isfinite(br) & (br > 0) & (br < smax), br, smax)
        br = np.sort(np.concatenate([np.zeros((kdim, 1)), br, np.full((kdim, 1), smax)], axis=1), axis=1)
        lo, w = br[:, :-1], np.diff(br, axis=1)
        t = lo[..., None] + w[..., None] * _GX
        g = f(np.sqrt(h * h + t * t))
        if m > 1:
            g = g * t ** (m - 1)
        coef = np.polynomial.legendre.legint(g @ _VINV.T, lbnd=-1, axis=-1) * (0.5 * w)[..., None]
        self.edges = br
        self.width = w
        self.coef = coef
        self.cum = np.concatenate(
            [np.zeros((kdim, 1)), np.cumsum(np.sum(g * _GW, axis=-1) * w, axis=1)], axis=1
        )

    def __call__(self, s: np.ndarray) -> np.ndarray:
        shape = s.shape
        kdim = shape[0]
        s2 = np.clip(s.reshape(kdim, -1), 0.0, self.smax)
        npan = self.width.shape[1]
        idx = np.sum(self.edges[:, None, 1:-1] <= s2[:, :, None], axis=-1)
        idx = np.minimum(idx, npan - 1)
        rows = np.arange(kdim)[:, None]
        lo = self.edges[rows, idx]
        w = self.width[rows, idx]
        xi = np.where(w > 0, 2.0 * (s2 - lo) / np.where(w > 0, w, 1.0) - 1.0, -1.0)
        c = np.moveaxis(self.coef[rows, idx], -1, 0)
        val = self.cum[rows, idx] + np.polynomial.legendre.legval(xi, c, tensor=False)
        return val.reshape(shape)


class _IndicatorPhi:
    """Fold of ``b r^{-N} 1[r <= R]`` onto the facet hyperplane at distance b.

    ``Phi(s) = ∫_0^{arctan(min(s, R_t)/b)} sin^{N-2}(θ) dθ`` with
    ``R_t = sqrt(R^2 - b^2)``.
    """

    def __init__(self, b: float, n: int, radius: np.ndarray) -> None:
        self.b = b
        self.n = n
        with np.errstate(invalid="ignore"):
            self.rt = np.sqrt(np.maximum(radius**2 - b * b, 0.0))
        self.active = radius > b
        self.kinks = np.where(self.active, self.rt, np.nan)[:, None]
        self.scales = np.full((radius.size, 1), np.nan)

    def __call__(self, s: np.ndarray) -> np.ndarray:
        rt = _bcast(self.rt, s.ndim)
        act = _bcast(self.active, s.ndim)
        sm = np.minimum(s, rt)
        return np.where(act, _sin_power_integral(np.arctan2(sm, self.b), self.n - 2), 0.0)


def _sin_power_integral(theta: np.ndarray, k: int) -> np.ndarray:
    """``∫_0^θ sin^k`` for ``0 <= θ <= π/2``."""
    if k == 0:
        return theta
    if k == 1:
        return 1.0 - np.cos(theta)
    if k == 2:
        return 0.5 * theta - 0.25 * np.sin(2 * theta)
    x = np.sin(theta) ** 2
    a = 0.5 * (k + 1)
    return 0.5 * special.betainc(a, 0.5, x) * special.beta(a, 0.5)


class _GammaTail:
    """``r -> b r^{-N} ρ^{-a} Γ(a, ρ r^2) / (2 π^{N/2})`` with ``a = k + N/2``."""

    def __init__(self, b: float, n: int, k: int, rho: np.ndarray) -> None:
        self.b = b
        self.n = n
        self.a = k + 0.5 * n
        self.rho = rho
        self.coef = b * rho ** (-self.a) * special.gamma(self.a) / (2.0 * np.pi ** (0.5 * n))
        self.kinks = np.full((rho.size, 1), np.nan)
        self.scales = (1.0 / np.sqrt(rho))[:, None]

    def __call__(self, r: np.ndarray) -> np.ndarray:
        rho = _bcast(self.rho, r.ndim)
        coef = _bcast(self.coef, r.ndim)
        return coef * r ** (-self.n) * special.gammaincc(self.a, rho * r * r)


class _GammaTailPhi3:
    """Closed-form fold of :class:`_GammaTail` for N = 3.

    With ``H(r) = -Γ(a, ρr²)/r + sqrt(ρ) Γ(k+1, ρr²)`` the fold is
    ``b ρ^{-a} / (2 π^{3/2}) [H(sqrt(b² + s²)) - H(b)]``.
    """

    def __init__(self, b: float, k: int, rho: np.ndarray) -> None:
        self.b = b
        self.k = k
        self.a = k + 1.5
        self.rho = rho
        self.coef = b * rho ** (-self.a) / (2.0 * np.pi**1.5)
        self.kinks = np.full((rho.size, 1), np.nan)
        self.scales = (1.0 / np.sqrt(rho))[:, None]
        self.h_b = self._h(np.full(rho.shape, b), rho)

    def _h(self, r: np.ndarray, rho: np.ndarray) -> np.ndarray:
        x = rho * r * r
        g_a = special.gammaincc(self.a, x) * special.gamma(self.a)
        g_k = special.gammaincc(self.k + 1, x) * special.gamma(self.k + 1)
        return -g_a / r + np.sqrt(rho) * g_k

    def __call__(self, s: np.ndarray) -> np.ndarray:
        rho = _bcast(self.rho, s.ndim)
        r = np.sqrt(self.b * self.b + s * s)
        return _bcast(self.coef, s.ndim) * (self._h(r, rho) - _bcast(self.h_b, s.ndim))


class _OwenPhi:
    """Closed-form fold of the N = 2 Gaussian tail via Owen's T function.

    Scaled by ``1/ρ`` to match :class:`_GammaTail` with ``k = 0``.
    """

    def __init__(self, b: float, rho: np.ndarray) -> None:
        self.b = b
        self.rho = rho
        self.kinks = np.full((rho.size, 1), np.nan)
        self.scales = (1.0 / np.sqrt(rho))[:, None]

    def __call__(self, s: np.ndarray) -> np.ndarray:
        rho = _bcast(self.rho, s.ndim)
        return special.owens_t(self.b * np.sqrt(2.0 * rho), s / self.b) / rho


# Simplex recursion -------------------------------------------------------


def _foot(p: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``p`` onto the affine hull of ``verts``."""
    o = verts[0]
    if len(verts) == 1:
        return o.copy()
    q, _ = np.linalg.qr((verts[1:] - o).T)
    return o + q @ (q.T @ (p - o))


def _simplex_radial(verts: np.ndarray, center: np.ndarray, phi_of, kdim: int) -> np.ndarray:
    """∫ over the simplex ``verts`` of a radial function about ``center``.

    ``phi_of(h, m)`` returns the fold object for height ``h`` over an
    ``m``-simplex; it is called once per recursion node.  The base case
    evaluates ``fn(dist)`` with ``fn = phi_of.base``.
    """
    m = len(verts) - 1
    c = _foot(center, verts)
    h = float(np.linalg.norm(c - center))
    scale = max(1.0, float(np.max(np.abs(verts))))
    smax = float(np.max(np.linalg.norm(verts - c, axis=1))) * (1.0 + 1e-12)
    phi = phi_of(h, m, smax)
    total = np.zeros(kdim)
    for k in range(m + 1):
        face = np.delete(verts, k, axis=0)
        ck = _foot(c, face)
        hk = float(np.linalg.norm(ck - c))
        if hk <= 1e-13 * scale:
            continue
        inward = verts[k] - _foot(verts[k], face)
        sign = 1.0 if np.dot(c - ck, inward) > 0 else -1.0
        lifted = _Lifted(phi, hk, m)
        if m == 1:
            dist = np.full((kdim, 1), float(np.linalg.norm(face[0] - c)))
            total += sign * lifted(dist)[:, 0]
        else:
            sub = _simplex_radial(face, c, lambda hh, mm, ss, f=lifted: _NumericPhi(f, hh, mm, ss), kdim)
            total += sign * sub
    return total


def facet_integral(simplex: np.ndarray, b: float, kind: str, param: np.ndarray, k: int = 0) -> np.ndarray:
    """Integral of ``b ‖y‖^{-N} Ψ(‖y‖)`` over one facet simplex.

    Parameters
    ----------
    simplex : ndarray, shape (N, N)
        Vertices (rows) on the hyperplane at distance ``b`` from the origin.
    kind : {"tail", "indicator"}
        ``"tail"``: Ψ(r) = ρ^{-a} Γ(a, ρr²) / (2π^{N/2}), a = k + N/2,
        evaluated for each ρ in ``param``.  ``"indicator"``: Ψ(r) =
        1[r² <= u] for each u in ``param`` (the solid angle of the
        sublevel set).
    """
    n = simplex.shape[1]
    param = np.asarray(param, dtype=float)
    kdim = param.size
    origin = np.zeros(n)

    if kind == "indicator":
        top = _IndicatorPhi(b, n, np.sqrt(param))
    elif kind == "tail":
        if n == 3:
            top = _GammaTailPhi3(b, k, param)
        elif n == 2 and k == 0:
            top = _OwenPhi(b, param)
        else:
            smax = float(np.max(np.sqrt(np.maximum(np.sum(simplex**2, axis=1) - b * b, 0.0))))
            top = _NumericPhi(_GammaTail(b, n, k, param), b, n - 1, smax * (1.0 + 1e-12))
    else:
        raise ValueError(f"unknown integrand kind {kind!r}")

    def top_of(h, m, smax):
        return top

    return _simplex_radial(simplex, origin, top_of, kdim)
