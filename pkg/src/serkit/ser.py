"""Symbol error rate: closed forms, Monte Carlo, cone quadrature, Bernstein form.

SNR convention (see :mod:`serkit.noise`): each real noise coordinate has
variance ``1 / (2 rho)``.  With it the SER of a constellation with reduced
dimension ``N`` is

    P(rho) = rho^{N/2} ∫ exp(-rho u) μ(u) du,

where ``μ(u) = u^{N/2-1} Ω(u) / (2 π^{N/2})`` and ``Ω(u)`` is the
prior-weighted solid angle of directions whose exit distance ``r̄``
satisfies ``r̄² <= u``.  ``μ`` vanishes below ``d_min² / 4`` and is
nondecreasing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import integrate, special

from .constellation import Constellation, ReducedConstellation, min_distance, reduce
from .geometry import Decomposition, cone_frame, decompose, default_clip_radius, rbar
from .noise import NoiseModel, sample_noise
from .quadrature import QuadratureError, facet_integral

__all__ = [
    "CmOrderReport",
    "CmVerdict",
    "EPS_NUM",
    "QuadratureError",
    "RepresentingFn",
    "SerEstimate",
    "TailError",
    "cm_check",
    "cm_order_conditions",
    "cube_mu",
    "default_u_grid",
    "q_function",
    "qam_mu",
    "reconstruct_ser",
    "representing_fn",
    "rho0",
    "ser_closed_cube",
    "ser_closed_qam",
    "ser_derivative",
    "ser_mc",
    "ser_mc_complex",
    "ser_moment",
    "ser_quadrature",
    "ser_quadrature_curve",
]

EPS_NUM = 1e-7
MAX_ORDER = 6
MC_CHUNK = 1 << 16
RHO_CLIP_FLOOR = 1e-2


class TailError(ValueError):
    """The representing-function grid stops before its Laplace tail is negligible."""


@dataclass(frozen=True)
class SerEstimate:
    value: float
    stderr: float
    method: str
    rho: float

    def __post_init__(self) -> None:
        if self.method not in ("mc", "quadrature", "closed_form"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (-1e-12 <= self.value <= 1 + 1e-12) or self.stderr < 0:
            raise ValueError(f"invalid estimate value={self.value} stderr={self.stderr}")
        if self.rho <= 0:
            raise ValueError("rho must be positive")


def q_function(x):
    """Gaussian tail ``Q(x) = P(G > x)`` for standard normal G."""
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def _check_rho(rho) -> np.ndarray:
    r = np.asarray(rho, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise ValueError("rho must be positive and finite")
    return r


# Closed forms --------------------------------------------------------------


def _qam_constants(m: int) -> tuple[float, float, float]:
    k = int(round(np.sqrt(m)))
    if k * k != m or k < 2:
        raise ValueError(f"M={m} is not a square >= 4")
    w1 = 4.0 * (k - 1) / k
    return w1, w1 * w1 / 4.0, 3.0 / (m - 1)


def ser_closed_qam(m: int, rho):
    """Square M-QAM at unit mean energy: ``w1 Q(√(ηρ)) - w2 Q²(√(ηρ))``.

    ``w1 = 4(√M-1)/√M``, ``w2 = w1²/4`` and ``η = 3/(M-1)``.  Returns a
    :class:`SerEstimate` for scalar ``rho`` and an array otherwise.
    """
    w1, w2, eta = _qam_constants(m)
    r = _check_rho(rho)
    q = q_function(np.sqrt(eta * r))
    val = w1 * q - w2 * q * q
    if r.ndim == 0:
        return SerEstimate(float(val), 0.0, "closed_form", float(r))
    return val


def qam_mu(m: int, u):
    """Representing function of the square M-QAM SER.

    ``μ(u) = √η/(2π) [w1 1{η/2 <= u <= η} + (w1 - w2) 1{u >= η}] / (u √(2u - η))``,
    which vanishes below ``η/2 = d_min²/4``.
    """
    w1, w2, eta = _qam_constants(m)
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.sqrt(eta) / (2 * np.pi) / (u * np.sqrt(2 * u - eta))
    out = np.where((u > eta / 2) & (u <= eta), w1 * base, 0.0)
    out = np.where(u > eta, (w1 - w2) * base, out)
    return float(out) if out.ndim == 0 else out


def ser_closed_cube(rho):
    """SER of the cube ``{±1}^3``: ``1 - (1 - Q(√(2ρ)))³``."""
    r = _check_rho(rho)
    val = -np.expm1(3.0 * np.log1p(-q_function(np.sqrt(2.0 * r))))
    if r.ndim == 0:
        return SerEstimate(float(val), 0.0, "closed_form", float(r))
    return val


def cube_mu(u):
    """Representing function of the cube SER (vertices ``{±1}^3``).

    ``μ(u) = g(u) / (2u √(u - 1))`` where ``g`` is ``3/π`` on ``[1, 2]``,
    ``(π - arccos α)/(2π²)`` on ``[3, 4]``, ``(π + arccos α)/(2π²)`` above 4
    and zero elsewhere, with ``α(u) = (3u² - 12u + 8)/(u - 2)³``.  On
    ``[2, 3]`` the ``3Q`` and ``3Q²`` contributions cancel.
    """
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = (3 * u * u - 12 * u + 8) / (u - 2) ** 3
        jac = 1.0 / (2 * u * np.sqrt(u - 1))
    ac = np.arccos(np.clip(np.nan_to_num(alpha), -1.0, 1.0))
    g = np.where((u > 1) & (u <= 2), 3 / np.pi, 0.0)
    g = np.where((u >= 3) & (u <= 4), (np.pi - ac) / (2 * np.pi**2), g)
    g = np.where(u > 4, (np.pi + ac) / (2 * np.pi**2), g)
    out = np.where(g > 0, g * np.nan_to_num(jac), 0.0)
    return float(out) if out.ndim == 0 else out


# Monte Carlo ----------------------------------------------------------------


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def ser_mc(
    c: Constellation,
    noise: NoiseModel | None,
    rho: float,
    n_samples: int,
    seed: int,
    fading=None,
    chunk_size: int = MC_CHUNK,
) -> SerEstimate:
    """Simulate the minimum-distance detector.

    Each chunk of ``chunk_size`` transmissions uses its own generator
    derived from ``(seed, chunk index)``, so results depend only on
    ``(seed, n_samples, chunk_size)``.  ``fading``, if given, is any object
    with ``sample(rng, size)`` returning power gains X; the noise is then
    scaled by ``1/√X`` (instantaneous SNR ``ρX``).
    """
    rho = float(_check_rho(rho))
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    pts = np.asarray(c.points, dtype=float)
    sym = pts.T
    energy = np.sum(sym * sym, axis=1)
    errors = 0
    done = 0
    index = 0
    while done < n_samples:
        size = min(chunk_size, n_samples - done)
        rng = _chunk_rng(seed, index)
        idx = rng.choice(sym.shape[0], size=size, p=c.priors)
        z = sample_noise(noise, rho, pts.shape[0], size, rng)
        if fading is not None:
            z /= np.sqrt(fading.sample(rng, size))[:, None]
        y = sym[idx] + z
        dec = np.argmin(energy[None, :] - 2.0 * y @ sym.T, axis=1)
        errors += int(np.count_nonzero(dec != idx))
        done += size
        index += 1
    p = errors / n_samples
    return SerEstimate(p, float(np.sqrt(p * (1 - p) / n_samples)), "mc", rho)


def ser_mc_complex(
    points,
    rho: float,
    n_samples: int,
    seed: int,
    priors=None,
    chunk_size: int = MC_CHUNK,
) -> SerEstimate:
    """Detector simulation on complex points (N x M) with circular noise.

    Each complex noise coordinate has ``E|z|² = 1/ρ``.
    """
    rho = float(_check_rho(rho))
    s = np.asarray(points, dtype=complex)
    if s.ndim == 1:
        s = s[None, :]
    m = s.shape[1]
    pri = np.full(m, 1.0 / m) if priors is None else np.asarray(priors, dtype=float)
    sym = s.T
    errors = done = index = 0
    sigma = np.sqrt(0.5 / rho)
    while done < n_samples:
        size = min(chunk_size, n_samples - done)
        rng = _chunk_rng(seed, index)
        idx = rng.choice(m, size=size, p=pri)
        g = rng.standard_normal((size, s.shape[0], 2))
        y = sym[idx] + sigma * (g[..., 0] + 1j * g[..., 1])
        d = np.sum(np.abs(y[:, None, :] - sym[None, :, :]) ** 2, axis=-1)
        errors += int(np.count_nonzero(np.argmin(d, axis=1) != idx))
        done += size
        index += 1
    p = errors / n_samples
    return SerEstimate(p, float(np.sqrt(p * (1 - p) / n_samples)), "mc", rho)


# Cone quadrature ------------------------------------------------------------


def _as_reduced(c, priors=None) -> ReducedConstellation:
    red = c if isinstance(c, ReducedConstellation) else reduce(c)
    if priors is not None:
        pri = np.asarray(priors, dtype=float)
        if pri.shape != (red.size,) or np.any(pri < 0) or abs(pri.sum() - 1) > 1e-12:
            raise ValueError("priors must be a probability vector over the symbols")
        red = ReducedConstellation(red.points, red.reduced_dim, red.rotation, red.singular_values, pri, red.label)
    return red


def _decomposition(red: ReducedConstellation, rho_min: float | None = None, u_max: float | None = None) -> Decomposition:
    if red.reduced_dim > 4:
        raise ValueError(f"quadrature supports reduced dimension <= 4, got {red.reduced_dim}")
    clip = default_clip_radius(red, min(RHO_CLIP_FLOOR, rho_min or RHO_CLIP_FLOOR))
    if u_max is not None:
        clip = max(clip, 1.01 * np.sqrt(u_max) + 1.0)
    return decompose(red, clip)


def _real_cones(dec: Decomposition):
    """Yield (prior, facet simplex, offset, cone) for every bisector cone."""
    pri = dec.reduced.priors
    for i, cones in enumerate(dec.cones):
        for cone in cones:
            if not cone.artificial and pri[i] > 0:
                yield pri[i], cone.facet_simplex(), cone.halfspace.b, cone


def _one_dim_offsets(dec: Decomposition):
    pri = dec.reduced.priors
    for i, reg in enumerate(dec.regions):
        for h in reg.halfspaces:
            if pri[i] > 0:
                yield pri[i], h.b


def ser_moment(c, rho, k: int = 0, priors=None) -> np.ndarray:
    """``M_k(ρ) = ∫ u^k exp(-ρu) μ(u) du`` by cone quadrature (array over ρ)."""
    red = _as_reduced(c, priors)
    r = np.atleast_1d(_check_rho(rho)).astype(float)
    n = red.reduced_dim
    dec = _decomposition(red, float(np.min(r)))
    total = np.zeros(r.size)
    if n == 1:
        a = k + 0.5
        for p, b in _one_dim_offsets(dec):
            total += p * r ** (-a) * special.gammaincc(a, r * b * b) * special.gamma(a) / (2 * np.sqrt(np.pi))
        return total
    for p, simplex, b, _ in _real_cones(dec):
        total += p * facet_integral(simplex, b, "tail", r, k)
    return total


def _angular_cone_ser(cone, rho: np.ndarray, tol: float) -> np.ndarray:
    """``(1/2π) ∫_0^{φ̄} exp(-ρ r̄(φ)²) dφ`` for a planar cone."""
    frame = cone_frame(cone)
    phimax = float(np.arccos(np.clip(cone.edges[:, 0] @ cone.edges[:, 1], -1.0, 1.0)))

    def f(phi):
        rb = rbar(cone.halfspace, np.array([phi]), frame)
        return np.exp(-rho * rb * rb) / (2 * np.pi)

    val, err = integrate.quad_vec(f, 0.0, phimax, epsabs=tol, epsrel=1e-12, limit=400)
    if not np.all(np.isfinite(val)) or err > tol:
        raise QuadratureError(f"angular quadrature error {err:.3g} exceeds tolerance {tol:.3g}")
    return val


def ser_quadrature_curve(c, rho, priors=None, tol: float = 1e-10, scheme: str = "auto") -> np.ndarray:
    """SER at each ρ by cone decomposition.

    ``scheme="angular"`` (the default for reduced dimension 2) integrates
    the exit distance over each cone's angle adaptively.  ``"facet"``
    integrates over the facet simplices with closed-form radial folds;
    it is used for dimensions 3 and 4 and is available for 2.
    """
    red = _as_reduced(c, priors)
    r = np.atleast_1d(_check_rho(rho)).astype(float)
    n = red.reduced_dim
    if n == 0:
        raise ValueError("constellation has zero rank")
    if n == 1:
        dec = _decomposition(red, float(np.min(r)))
        out = np.zeros(r.size)
        for p, b in _one_dim_offsets(dec):
            out += p * 0.5 * special.erfc(b * np.sqrt(r))
        return out
    if scheme == "auto":
        scheme = "angular" if n == 2 else "facet"
    dec = _decomposition(red, float(np.min(r)))
    if scheme == "angular":
        if n != 2:
            raise ValueError("angular scheme is implemented for reduced dimension 2")
        cones = list(_real_cones(dec))
        out = np.zeros(r.size)
        for p, _, _, cone in cones:
            out += p * _angular_cone_ser(cone, r, tol / max(len(cones), 1))
    elif scheme == "facet":
        out = r ** (0.5 * n) * ser_moment(red, r, 0)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not np.all(np.isfinite(out)) or np.any(out < -tol) or np.any(out > 1 + tol):
        raise QuadratureError("quadrature produced an out-of-range SER")
    return np.clip(out, 0.0, 1.0)


def ser_quadrature(c, priors=None, rho: float = 1.0, tol: float = 1e-10, scheme: str = "auto") -> SerEstimate:
    """SER at one SNR by cone quadrature; see :func:`ser_quadrature_curve`."""
    val = ser_quadrature_curve(c, np.array([rho], dtype=float), priors, tol, scheme)[0]
    return SerEstimate(float(val), 0.0, "quadrature", float(rho))


# Representing function -------------------------------------------------------


@dataclass(frozen=True)
class RepresentingFn:
    """Samples of μ on an increasing grid of ``u >= 0``."""

    u_grid: np.ndarray
    mu_values: np.ndarray
    reduced_dim: int
    support_onset: float | None = None

    def __post_init__(self) -> None:
        u = np.array(self.u_grid, dtype=float)
        mu = np.array(self.mu_values, dtype=float)
        if u.ndim != 1 or u.shape != mu.shape:
            raise ValueError("u_grid and mu_values must be 1-D arrays of equal length")
        if u.size < 2 or np.any(np.diff(u) <= 0) or u[0] < 0:
            raise ValueError("u_grid must be nonnegative and strictly increasing")
        u.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "u_grid", u)
        object.__setattr__(self, "mu_values", mu)

    def to_csv(self) -> str:
        rows = ["u,mu"] + [f"{a:.17g},{b:.17g}" for a, b in zip(self.u_grid, self.mu_values)]
        return "\n".join(rows) + "\n"


def representing_fn(c, priors=None, u_grid=None, tol: float = 1e-10, chunk: int = 256) -> RepresentingFn:
    """Sample μ on ``u_grid`` from the solid angles of the sublevel sets of r̄².

    Warns when the grid cannot resolve the onset at ``d_min² / 4``.
    """
    red = _as_reduced(c, priors)
    n = red.reduced_dim
    if n < 2:
        raise ValueError("the representing function is defined for reduced dimension >= 2")
    u = np.asarray(u_grid, dtype=float)
    if u.ndim != 1 or u.size < 2 or np.any(np.diff(u) <= 0) or u[0] < 0:
        raise ValueError("u_grid must be nonnegative and strictly increasing")
    onset = min_distance(red) ** 2 / 4
    k = int(np.searchsorted(u, onset * (1 - 1e-12)))
    step = np.inf if k >= u.size - 1 else max(u[k] - onset, u[k + 1] - u[k])
    if step > 0.05 * onset:
        warnings.warn(
            f"u grid does not resolve the support onset {onset:.6g} (local step {step:.3g})",
            stacklevel=2,
        )
    dec = _decomposition(red, None, float(u[-1]))
    omega = np.zeros(u.size)
    for p, simplex, b, _ in _real_cones(dec):
        for s in range(0, u.size, chunk):
            part = u[s : s + chunk]
            active = part > b * b
            if np.any(active):
                omega[s : s + chunk][active] += p * facet_integral(simplex, b, "indicator", part[active])
    mu = u ** (0.5 * n - 1) * omega / (2 * np.pi ** (0.5 * n))
    return RepresentingFn(u, mu, n, onset)


def default_u_grid(c, u_max: float | None = None, n: int = 2001) -> np.ndarray:
    """Grid for :func:`representing_fn`: zero, then quadratic spacing from the onset.

    Points ``onset + (u_max - onset) t²`` for uniform ``t`` make the
    square-root growth of μ just above ``d_min²/4`` piecewise linear to
    good accuracy.  ``u_max`` defaults to 60 times the onset.
    """
    red = _as_reduced(c)
    onset = min_distance(red) ** 2 / 4
    u_max = 60 * onset if u_max is None else float(u_max)
    if not u_max > onset or n < 3:
        raise ValueError("need u_max above the onset and n >= 3")
    t = np.linspace(0.0, 1.0, n - 1)
    return np.concatenate([[0.0], onset + (u_max - onset) * t * t])


def _exp_linear_weights(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``∫_0^1 e^{-xt} dt`` and ``∫_0^1 t e^{-xt} dt`` without cancellation."""
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    em = -np.expm1(-xs)
    w0 = np.where(small, 1 - x / 2 + x * x / 6 - x**3 / 24, em / xs)
    w1 = np.where(small, 0.5 - x / 3 + x * x / 8 - x**3 / 30, (em - xs * np.exp(-xs)) / (xs * xs))
    return w0, w1


def reconstruct_ser(mu: RepresentingFn, rho, tol: float = 1e-9):
    """``ρ^{N/2} ∫ exp(-ρu) μ(u) du`` for the piecewise-linear interpolant of μ.

    Each grid interval is integrated exactly against the exponential.
    Raises :class:`TailError` when the neglected tail beyond the last grid
    point, estimated as ``ρ^{N/2-1} μ(U) e^{-ρU}`` times a growth margin,
    exceeds ``tol``.
    """
    r = np.atleast_1d(_check_rho(rho)).astype(float)
    u, m = mu.u_grid, mu.mu_values
    du = np.diff(u)
    half = 0.5 * mu.reduced_dim
    out = np.empty(r.size)
    for j, rr in enumerate(r):
        x = rr * du
        w0, w1 = _exp_linear_weights(x)
        e0 = np.exp(-rr * u[:-1])
        integral = np.sum(e0 * du * (m[:-1] * w0 + (m[1:] - m[:-1]) * w1))
        tail = rr ** (half - 1) * m[-1] * np.exp(-rr * u[-1]) * (1 + half / max(rr * u[-1], 1e-300))
        if tail > tol:
            raise TailError(f"grid ends at u={u[-1]:.4g}; tail {tail:.3g} exceeds {tol:.3g} at rho={rr:.4g}")
        out[j] = rr**half * integral
    if np.ndim(rho) == 0:
        return SerEstimate(float(np.clip(out[0], 0, 1)), 0.0, "quadrature", float(rho))
    return out


# Derivatives and convexity ------------------------------------------------


def ser_derivative(c, priors=None, rho=1.0, order: int = 1):
    """``d^n P / dρ^n`` from ``P = ρ^{N/2} M_0`` and ``M_0^{(j)} = (-1)^j M_j``.

    Exact differentiation under the Laplace integral; ``order <= 6``.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be between 0 and {MAX_ORDER}")
    red = _as_reduced(c, priors)
    r = np.atleast_1d(_check_rho(rho)).astype(float)
    p = 0.5 * red.reduced_dim
    out = np.zeros(r.size)
    for j in range(order + 1):
        i = order - j
        fall = np.prod([p - t for t in range(i)]) if i else 1.0
        if fall == 0.0:
            continue
        out += comb(order, j) * fall * r ** (p - i) * (-1) ** j * ser_moment(red, r, j)
    return float(out[0]) if np.ndim(rho) == 0 else out


def rho0(c) -> float:
    """Convexity threshold ``4(p + √p)/d_min²`` with ``p = N/2 - 1``.

    Requires reduced dimension above 2.
    """
    red = c if isinstance(c, ReducedConstellation) else reduce(c)
    if red.reduced_dim <= 2:
        raise ValueError("the convexity threshold needs reduced dimension > 2")
    p = 0.5 * red.reduced_dim - 1
    return 4 * (p + np.sqrt(p)) / min_distance(red) ** 2


@dataclass(frozen=True)
class CmVerdict:
    """Outcome of a complete-monotonicity check.

    ``is_cm`` is ``"yes"``, ``"no"`` or ``"inconclusive"``; ``basis`` is
    ``"reduced_dim_rule"``, ``"derivative_scan"`` or ``"mu_nonneg"``.
    ``witness`` is ``(rho, order)`` where ``(-1)^n P^{(n)}`` is most
    negative at the lowest failing order.
    """

    is_cm: str
    max_order_checked: int
    basis: str
    witness: tuple[float, int] | None = None
    reduced_dim: int = 0
    negative_intervals: tuple[tuple[float, float], ...] = ()
    scan: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.witness is not None) != (self.is_cm == "no" and self.basis == "derivative_scan"):
            raise ValueError("a witness accompanies exactly the failed derivative scans")

    def to_dict(self) -> dict:
        d = {
            "isCm": self.is_cm,
            "basis": self.basis,
            "maxOrderChecked": self.max_order_checked,
            "reducedDim": self.reduced_dim,
        }
        if self.witness is not None:
            d["witness"] = {"rho": self.witness[0], "order": self.witness[1]}
            d["negativeIntervals"] = [list(iv) for iv in self.negative_intervals]
        if self.scan:
            d["scan"] = self.scan
        return d


def _intervals(grid: np.ndarray, mask: np.ndarray) -> tuple[tuple[float, float], ...]:
    out = []
    start = None
    for k, flag in enumerate(mask):
        if flag and start is None:
            start = k
        if start is not None and (not flag or k == len(mask) - 1):
            end = k if flag else k - 1
            out.append((float(grid[start]), float(grid[end])))
            start = None
    return tuple(out)


def cm_check(c, rho_grid=None, max_order: int = 4, eps: float = EPS_NUM, scan: bool = False) -> CmVerdict:
    """Complete-monotonicity verdict for the SER as a function of ρ.

    Reduced dimension <= 2 gives ``"yes"`` by rule (the scan is still run
    and attached when ``scan=True``).  Otherwise ``(-1)^n P^{(n)}`` is
    checked for ``n <= max_order`` on the grid: any value below ``-eps``
    gives ``"no"``, otherwise ``"inconclusive"``.
    """
    if not 0 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must be between 0 and {MAX_ORDER}")
    red = c if isinstance(c, ReducedConstellation) else reduce(c)
    grid = np.geomspace(0.2, 20.0, 40) if rho_grid is None else np.asarray(rho_grid, dtype=float)
    n = red.reduced_dim
    if n <= 2 and not scan:
        return CmVerdict("yes", max_order, "reduced_dim_rule", reduced_dim=n)
    signed = {k: (-1) ** k * np.atleast_1d(ser_derivative(red, None, grid, k)) for k in range(max_order + 1)}
    report = {
        "rho": grid.tolist(),
        "minSignedDerivative": {str(k): float(np.min(v)) for k, v in signed.items()},
    }
    if n <= 2:
        return CmVerdict("yes", max_order, "reduced_dim_rule", reduced_dim=n, scan=report)
    for k in range(max_order + 1):
        bad = signed[k] < -eps
        if np.any(bad):
            at = int(np.argmin(signed[k]))
            return CmVerdict(
                "no",
                max_order,
                "derivative_scan",
                (float(grid[at]), k),
                n,
                _intervals(grid, bad),
                report,
            )
    return CmVerdict("inconclusive", max_order, "derivative_scan", reduced_dim=n, scan=report)


@dataclass(frozen=True)
class CmOrderReport:
    alpha: int
    nonnegative: bool
    vanishes_below_support: bool
    monotone: bool
    violation_index: int | None = None
    violation: str = ""

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.vanishes_below_support and self.monotone


def cm_order_conditions(mu: RepresentingFn, alpha: int = 1, neg_tol: float = 1e-12, mono_tol: float = 1e-9) -> CmOrderReport:
    """Check the sampled conditions for ``ρ^α``-weighted complete monotonicity.

    Order 1: μ >= 0, μ = 0 below the support onset, μ nondecreasing.
    Order 2: additionally the first difference quotient of μ is
    nonnegative and nondecreasing.
    """
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 or 2")
    u, m = mu.u_grid, mu.mu_values
    if u.size < 3:
        raise ValueError("grid too coarse: need at least three samples")
    first_bad = None
    what = ""

    def note(idx, msg):
        nonlocal first_bad, what
        if first_bad is None or idx < first_bad:
            first_bad, what = idx, msg

    neg = np.flatnonzero(m < -neg_tol)
    if neg.size:
        note(int(neg[0]), "negative value")
    vanishes = True
    if mu.support_onset is not None:
        bad = np.flatnonzero((u < mu.support_onset * (1 - 1e-9)) & (np.abs(m) > 1e-9))
        vanishes = bad.size == 0
        if bad.size:
            note(int(bad[0]), "nonzero below support onset")
    seq = m if alpha == 1 else np.diff(m) / np.diff(u)
    scale = max(1.0, float(np.max(np.abs(seq)))) if seq.size else 1.0
    dec = np.flatnonzero(np.diff(seq) < -mono_tol * scale)
    if dec.size:
        note(int(dec[0]) + 1, "decreasing step" if alpha == 1 else "difference quotient decreases")
    if alpha == 2:
        negq = np.flatnonzero(seq < -mono_tol * scale)
        if negq.size:
            note(int(negq[0]), "negative difference quotient")
    return CmOrderReport(
        alpha,
        nonnegative=neg.size == 0 and (alpha == 1 or not np.any(seq < -mono_tol * scale)),
        vanishes_below_support=vanishes,
        monotone=dec.size == 0,
        violation_index=first_bad,
        violation=what,
    )
