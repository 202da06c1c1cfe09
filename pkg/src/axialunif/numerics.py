"""Random streams and special functions shared by the rest of the package.

Normal and central chi-square functions are thin wrappers over
``scipy.special``; the noncentral chi-square CDF is a Poisson mixture of
central chi-square CDFs truncated on Poisson tail mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "NumericalError",
    "RngStream",
    "DistRef",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_cdf_dd",
    "normal_quantile",
    "chisq_cdf",
    "chisq_sf",
    "chisq_quantile",
    "noncentral_chisq_cdf",
    "noncentral_chisq_pdf",
    "sample_normal",
    "sample_uniform",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_POISSON_TAIL = 1e-12
_MAX_POISSON_TERMS = 100_000


class NumericalError(ArithmeticError):
    """Quadrature, eigensolver or series failed to converge."""


@dataclass
class RngStream:
    """Deterministic random stream indexed by ``(master_seed, stream_index)``.

    The underlying generator is seeded from ``SeedSequence(master_seed,
    spawn_key=(stream_index,))``, so streams are derived by hashing and do
    not depend on the order in which replicates are scheduled.
    """

    master_seed: int
    stream_index: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_index < 0:
            raise ValueError("seed and stream index must be non-negative")
        ss = np.random.SeedSequence(int(self.master_seed),
                                    spawn_key=(int(self.stream_index),))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, size=None):
        return self._gen.random(size)


def sample_normal(stream: RngStream, size=None):
    """Standard normal draw(s) from ``stream``."""
    return stream.normal(size)


def sample_uniform(stream: RngStream, size=None):
    """Uniform draw(s) on [0, 1) from ``stream``."""
    return stream.uniform(size)


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def std_normal_cdf(x):
    """Standard normal distribution function."""
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def std_normal_cdf_dd(x):
    """Second derivative of the standard normal CDF, ``-x * phi(x)``."""
    x = np.asarray(x, dtype=float)
    out = -x * std_normal_pdf(x)
    return float(out) if np.ndim(out) == 0 else out


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def normal_quantile(alpha_upper: float) -> float:
    """Upper ``alpha_upper``-quantile ``z`` with ``Phi(z) = 1 - alpha_upper``."""
    _check_alpha(alpha_upper)
    return float(-special.ndtri(alpha_upper))


def _check_df(df):
    if not df >= 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df!r}")


def chisq_cdf(x, df):
    """Chi-square CDF, i.e. the regularized lower incomplete gamma P(df/2, x/2)."""
    _check_df(df)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    out = special.gammainc(0.5 * df, 0.5 * x)
    return float(out) if np.ndim(out) == 0 else out


def chisq_sf(x, df):
    """Upper tail of the chi-square law, accurate far in the tail."""
    _check_df(df)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    out = special.gammaincc(0.5 * df, 0.5 * x)
    return float(out) if np.ndim(out) == 0 else out


def chisq_quantile(alpha_upper: float, df) -> float:
    """Upper ``alpha_upper``-quantile of the chi-square law with ``df`` dof."""
    _check_alpha(alpha_upper)
    _check_df(df)
    return float(special.chdtri(df, alpha_upper))


def _poisson_weights(lam: float) -> np.ndarray:
    """Poisson(lam) probabilities 0..J with the tail beyond J below 1e-12."""
    if lam == 0.0:
        return np.ones(1)
    # start past the mode so the remaining tail is checked only where it is small
    j_hi = int(lam + 10.0 * math.sqrt(lam) + 20)
    while special.pdtrc(j_hi, lam) >= _POISSON_TAIL:
        j_hi *= 2
        if j_hi > _MAX_POISSON_TERMS:
            raise NumericalError("Poisson mixture did not truncate")
    j = np.arange(j_hi + 1)
    return np.exp(-lam + j * math.log(lam) - special.gammaln(j + 1.0))


def noncentral_chisq_cdf(x, df, delta):
    """CDF of the noncentral chi-square law with ``df`` dof and noncentrality ``delta``.

    Evaluated as the Poisson(delta/2) mixture of central chi-square CDFs with
    ``df + 2j`` degrees of freedom.
    """
    _check_df(df)
    if delta < 0:
        raise ValueError(f"noncentrality must be >= 0, got {delta!r}")
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    w = _poisson_weights(0.5 * float(delta))
    dofs = df + 2.0 * np.arange(w.size)
    terms = special.gammainc(0.5 * dofs, 0.5 * x[..., None])
    out = np.clip(terms @ w, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def noncentral_chisq_pdf(x, df, delta):
    """Density matching :func:`noncentral_chisq_cdf`."""
    _check_df(df)
    if delta < 0:
        raise ValueError(f"noncentrality must be >= 0, got {delta!r}")
    x = np.asarray(x, dtype=float)
    w = _poisson_weights(0.5 * float(delta))
    k = 0.5 * (df + 2.0 * np.arange(w.size))
    xx = np.where(x > 0, x, 1.0)[..., None]
    logpdf = (k - 1.0) * np.log(xx) - 0.5 * xx - k * math.log(2.0) - special.gammaln(k)
    out = np.where(x > 0, np.exp(logpdf) @ w, 0.0)
    return float(out) if np.ndim(out) == 0 else out


_DISTREF_ARITY = {
    "normal": 2,                # mean, sd
    "chisq": 1,                 # df
    "noncentral_chisq": 2,      # df, delta
    "lmax_empirical": 2,        # p, tau
    "lmin_empirical": 2,
    "labs_empirical": 2,
    "lmax_p2_exact": 0,
    "lmax_p3_exact": 0,
    "labs_p3_exact": 0,
}


@dataclass(frozen=True)
class DistRef:
    """Reference to a null or limiting law used to compute p-values."""

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _DISTREF_ARITY:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if len(self.params) != _DISTREF_ARITY[self.kind]:
            raise ValueError(f"{self.kind} expects {_DISTREF_ARITY[self.kind]} parameters")
        if self.kind in ("chisq", "noncentral_chisq") and self.params[0] < 1:
            raise ValueError("degrees of freedom must be >= 1")
        if self.kind == "noncentral_chisq" and self.params[1] < 0:
            raise ValueError("noncentrality must be >= 0")

    def describe(self) -> dict:
        names = {
            "normal": ("mean", "sd"),
            "chisq": ("df",),
            "noncentral_chisq": ("df", "delta"),
            "lmax_empirical": ("p", "tau"),
            "lmin_empirical": ("p", "tau"),
            "labs_empirical": ("p", "tau"),
        }.get(self.kind, ())
        return {"kind": self.kind, "params": dict(zip(names, self.params))}
