"""Gaussian and compound-Gaussian noise.

SNR convention: at SNR ``rho`` each real noise coordinate has variance
``1 / (2 rho)``, i.e. density proportional to ``exp(-rho * x**2)``.  A
complex noise sample therefore has ``E|z|^2 = 1 / rho``.

Compound noise is ``Z = sqrt(W) * G`` with one positive mixing draw ``W``
per noise vector, so the coordinates are uncorrelated but dependent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "IdentityReport",
    "MixingSpec",
    "NoiseModel",
    "compound_ser_identity_check",
    "noise_variance",
    "sample_mixing",
    "sample_noise",
]

FAMILIES = {
    "degenerate": ("w0",),
    "gamma": ("shape", "scale"),
    "levy": ("scale",),
    "affine_poisson": ("a", "b", "lam"),
}


def noise_variance(rho) -> np.ndarray | float:
    """Per-coordinate noise variance at SNR ``rho``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("rho must be positive")
    out = 0.5 / rho
    return float(out) if out.ndim == 0 else out


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class MixingSpec:
    """Distribution of the mixing variable W.

    Families and parameters:

    ``degenerate(w0)``
        W = w0.
    ``gamma(shape, scale)``
        Gamma with the given shape and scale.
    ``levy(scale)``
        One-sided stable law with index 1/2, sampled as ``scale / G**2``
        for standard normal G.  Its median is ``scale / Φ⁻¹(3/4)**2``.
    ``affine_poisson(a, b, lam)``
        ``a + b * Poisson(lam)``; ``a > 0`` keeps W positive.
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown mixing family {self.family!r}")
        names = FAMILIES[self.family]
        missing = [k for k in names if k not in self.params]
        if missing:
            raise ValueError(f"{self.family} mixing needs parameters {missing}")
        extra = set(self.params) - set(names)
        if extra:
            raise ValueError(f"unexpected parameters for {self.family}: {sorted(extra)}")
        vals = {k: float(self.params[k]) for k in names}
        for k, v in vals.items():
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"mixing parameter {k} must be positive, got {v}")
        object.__setattr__(self, "params", vals)

    @classmethod
    def degenerate(cls, w0: float = 1.0) -> MixingSpec:
        return cls("degenerate", {"w0": w0})

    @classmethod
    def gamma(cls, shape: float, scale: float) -> MixingSpec:
        return cls("gamma", {"shape": shape, "scale": scale})

    @classmethod
    def levy(cls, scale: float = 1.0) -> MixingSpec:
        return cls("levy", {"scale": scale})

    @classmethod
    def affine_poisson(cls, a: float, b: float, lam: float) -> MixingSpec:
        return cls("affine_poisson", {"a": a, "b": b, "lam": lam})

    @classmethod
    def from_dict(cls, d: dict) -> MixingSpec:
        d = dict(d)
        family = d.pop("family", None)
        if family is None:
            raise ValueError("mixing spec needs a 'family' key")
        if family == "affine_poisson" and "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(family, d)

    def to_dict(self) -> dict:
        return {"family": self.family, **self.params}


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "awgn"
    mixing: MixingSpec | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("awgn", "compound"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "compound" and self.mixing is None:
            raise ValueError("compound noise needs a MixingSpec")

    @classmethod
    def awgn(cls) -> NoiseModel:
        return cls("awgn")

    @classmethod
    def compound(cls, mixing: MixingSpec) -> NoiseModel:
        return cls("compound", mixing)


def sample_mixing(spec: MixingSpec, count: int, seed=None) -> np.ndarray:
    """Draw ``count`` positive samples of W."""
    rng = _rng(seed)
    p = spec.params
    if spec.family == "degenerate":
        return np.full(count, p["w0"])
    if spec.family == "gamma":
        return rng.gamma(p["shape"], p["scale"], size=count)
    if spec.family == "levy":
        g = rng.standard_normal(count)
        return p["scale"] / (g * g)
    return p["a"] + p["b"] * rng.poisson(p["lam"], size=count)


def sample_noise(model: NoiseModel | None, rho: float, dim: int, count: int, seed=None) -> np.ndarray:
    """Noise vectors as rows of a (count, dim) array."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    rng = _rng(seed)
    sigma = np.sqrt(noise_variance(rho))
    z = sigma * rng.standard_normal((count, dim))
    if model is not None and model.kind == "compound":
        w = sample_mixing(model.mixing, count, rng)
        z *= np.sqrt(w)[:, None]
    return z


@dataclass(frozen=True)
class IdentityReport:
    """Direct compound-noise SER versus the W-average of AWGN SERs."""

    direct: float
    direct_stderr: float
    mixture: float
    mixture_stderr: float
    z: float
    rho: float

    @property
    def consistent(self) -> bool:
        return abs(self.z) < 3.0


def compound_ser_identity_check(
    c,
    spec: MixingSpec,
    rho: float,
    n: int,
    seed: int,
    awgn_ser=None,
) -> IdentityReport:
    """Check ``SER_compound(rho) = E_W[SER_awgn(rho / W)]`` by two estimators.

    The direct side simulates the detector under compound noise.  The
    mixture side draws ``n`` values of W and averages an analytic AWGN SER
    (``awgn_ser``, a vectorised callable of the SNR; default is the
    cone quadrature of ``c``).
    """
    from .ser import ser_mc, ser_quadrature_curve

    direct = ser_mc(c, NoiseModel.compound(spec), rho, n, seed)
    # Entropy differs from every simulator chunk stream, so draws are independent.
    w = sample_mixing(spec, n, np.random.default_rng(np.random.SeedSequence([seed, 1])))
    eff = rho / w
    if awgn_ser is None:
        vals = _ser_on_samples(lambda r: ser_quadrature_curve(c, r), eff)
    else:
        vals = np.asarray(awgn_ser(eff), dtype=float)
    mix = float(np.mean(vals))
    mix_se = float(np.std(vals, ddof=1) / np.sqrt(n))
    z = (direct.value - mix) / np.hypot(direct.stderr, mix_se)
    return IdentityReport(direct.value, direct.stderr, mix, mix_se, float(z), float(rho))


def _ser_on_samples(fn, eff: np.ndarray, nodes: int = 400) -> np.ndarray:
    """Evaluate a smooth SER curve at many SNRs via log-SNR interpolation.

    SNRs beyond the interpolation range are clamped to its ends; the SER
    there is flat to within the clamp (1e-6 and 1e6).
    """
    lo = max(float(np.min(eff)), 1e-6)
    hi = min(float(np.max(eff)), 1e6)
    if hi <= lo * (1 + 1e-12):
        return np.full(eff.shape, float(fn(np.array([lo]))[0]))
    grid = np.geomspace(lo, hi, nodes)
    vals = fn(grid)
    x = np.log(np.clip(eff, lo, hi))
    return CubicSpline(np.log(grid), vals)(x)

