"""Scatter matrix and axial test statistics of uniformity.

Every statistic is a function of the scatter matrix ``S_n = n^{-1} sum X_i X_i'``:

* specified-axis test ``T_theta = sqrt(n) (p theta' S theta - 1) / sqrt(Gamma_p)``;
* Bingham test ``Q = n p (p+2)/2 (tr S^2 - 1/p)``;
* extreme-eigenvalue tests ``T_+``, ``T_-`` and ``T_pm``;
* the Rayleigh test, kept as a baseline that is blind to axial alternatives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import limlaw
from .linalg import jacobi_eigh
from .models import SphericalSample, normalizing_constant, uniform_constant, WATSON
from .numerics import (
    DistRef,
    chisq_sf,
    std_normal_cdf,
)

__all__ = [
    "ScatterSpectrum",
    "TestReport",
    "TEST_NAMES",
    "gamma_scalar",
    "bingham_df",
    "scatter_matrix",
    "delta_theta",
    "t_specified",
    "bingham_q",
    "t_plus",
    "t_minus",
    "t_pm",
    "sup_identity_check",
    "rayleigh_stat",
    "watson_loglik_ratio",
    "vec_central_sequence",
    "commutation_matrix",
    "gamma_matrix",
]

TEST_NAMES = ("specified_right", "specified_left", "specified_two_sided",
              "bingham", "t_plus", "t_minus", "t_pm", "rayleigh")
_SIDES = {"right": "specified_right", "left": "specified_left",
          "two_sided": "specified_two_sided"}


@dataclass(frozen=True)
class ScatterSpectrum:
    """Scatter matrix with its eigenvalues (descending) and eigenvectors."""

    S: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n: int

    @property
    def p(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # keep pytest from collecting it

    test_name: str
    statistic: float
    null_ref: DistRef
    p_value: float
    alpha: float
    reject: bool
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.test_name not in TEST_NAMES:
            raise ValueError(f"unknown test {self.test_name!r}")


def gamma_scalar(p: int) -> float:
    """Fisher information ``2 (p - 1) / (p + 2)`` of the specified-axis problem."""
    return 2.0 * (p - 1) / (p + 2)


def bingham_df(p: int) -> int:
    return p * (p + 1) // 2 - 1


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def _as_spectrum(data) -> ScatterSpectrum:
    if isinstance(data, ScatterSpectrum):
        return data
    return scatter_matrix(data)


def scatter_matrix(sample: SphericalSample) -> ScatterSpectrum:
    """Scatter matrix of ``sample`` and its Jacobi eigen-decomposition."""
    if not isinstance(sample, SphericalSample):
        sample = SphericalSample(sample)
    x = sample.points
    S = x.T @ x / sample.n
    S = 0.5 * (S + S.T)
    w, V = jacobi_eigh(S)
    return ScatterSpectrum(S, w, V, sample.n)


def _unit(theta, p):
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != p:
        raise ValueError(f"theta has length {theta.size}, expected p={p}")
    if abs(np.linalg.norm(theta) - 1.0) > 1e-8:
        raise ValueError("theta must be a unit vector")
    return theta


def delta_theta(sample, theta) -> float:
    """Central sequence ``sqrt(n) (p theta' S_n theta - 1)``."""
    spec = _as_spectrum(sample)
    theta = _unit(theta, spec.p)
    return math.sqrt(spec.n) * (spec.p * float(theta @ spec.S @ theta) - 1.0)


def _report(name, stat, ref, pval, alpha, **params):
    pval = float(min(max(pval, 0.0), 1.0))
    return TestReport(name, float(stat), ref, pval, float(alpha), bool(pval < alpha), params)


def t_specified(sample, theta, side="right", alpha=0.05) -> TestReport:
    """Locally optimal test of uniformity against alternatives about a known axis.

    ``side`` is ``"right"`` (bipolar, kappa > 0), ``"left"`` (girdle,
    kappa < 0) or ``"two_sided"``.
    """
    if side not in _SIDES:
        raise ValueError(f"side must be one of {sorted(_SIDES)}, got {side!r}")
    _check_alpha(alpha)
    spec = _as_spectrum(sample)
    T = delta_theta(spec, theta) / math.sqrt(gamma_scalar(spec.p))
    if side == "right":
        pval = std_normal_cdf(-T)
    elif side == "left":
        pval = std_normal_cdf(T)
    else:
        pval = 2.0 * std_normal_cdf(-abs(T))
    return _report(_SIDES[side], T, DistRef("normal", (0.0, 1.0)), pval, alpha,
                   p=spec.p, n=spec.n, theta=[float(v) for v in theta])


def bingham_q(sample, alpha=0.05) -> TestReport:
    """Bingham statistic with its chi-square(p(p+1)/2 - 1) null reference."""
    _check_alpha(alpha)
    spec = _as_spectrum(sample)
    p, n = spec.p, spec.n
    Q = 0.5 * n * p * (p + 2) * (float(np.sum(spec.S * spec.S)) - 1.0 / p)
    d = bingham_df(p)
    return _report("bingham", Q, DistRef("chisq", (d,)), chisq_sf(Q, d), alpha, p=p, n=n)


def _eigen_stats(w, n, p):
    sn = math.sqrt(n)
    tp = sn * (p * w[0] - 1.0)
    tm = -sn * (p * w[-1] - 1.0)
    # p lambda_1 >= 1 >= p lambda_p, so the two-sided sup is max(T_+, T_-)
    return tp, tm, max(tp, tm)


def _eigen_report(name, sample, alpha, m, seed, method):
    _check_alpha(alpha)
    spec = _as_spectrum(sample)
    p, n = spec.p, spec.n
    tp, tm, tpm = _eigen_stats(spec.eigenvalues, n, p)
    stat = {"t_plus": tp, "t_minus": tm, "t_pm": tpm}[name]
    ref = limlaw.null_ref(name, p, method)
    params = {"p": p, "n": n}
    if ref.kind.endswith("_empirical"):
        params.update(m=int(m), seed=int(seed))
    pval = limlaw.null_sf(name, p, stat, m=m, seed=seed, method=method)
    return _report(name, stat, ref, pval, alpha, **params)


def t_plus(sample, alpha=0.05, m=limlaw.DEFAULT_CRIT_M, seed=0, method="auto") -> TestReport:
    """``T_+ = sqrt(n) (p lambda_1 - 1)``, against bipolar alternatives.

    With ``method="auto"`` null p-values are exact for p in {2, 3} and
    otherwise come from a simulated limiting-law table with ``m`` draws and
    the given ``seed``; ``"analytic"`` and ``"mc"`` force one or the other.
    """
    return _eigen_report("t_plus", sample, alpha, m, seed, method)


def t_minus(sample, alpha=0.05, m=limlaw.DEFAULT_CRIT_M, seed=0, method="auto") -> TestReport:
    """``T_- = -sqrt(n) (p lambda_p - 1)``, against girdle alternatives."""
    return _eigen_report("t_minus", sample, alpha, m, seed, method)


def t_pm(sample, alpha=0.05, m=limlaw.DEFAULT_CRIT_M, seed=0, method="auto") -> TestReport:
    """``T_pm = max(T_+, T_-)``, the two-sided extreme-eigenvalue test."""
    return _eigen_report("t_pm", sample, alpha, m, seed, method)


def sup_identity_check(sample) -> float:
    """``|Delta_{v_1} - T_+|`` where ``v_1`` is the leading eigenvector of ``S_n``."""
    spec = _as_spectrum(sample)
    tp, _, _ = _eigen_stats(spec.eigenvalues, spec.n, spec.p)
    return abs(delta_theta(spec, spec.eigenvectors[:, 0]) - tp)


def rayleigh_stat(sample, alpha=0.05) -> TestReport:
    """Rayleigh statistic ``n p ||mean(X)||^2`` with its chi-square(p) null limit."""
    _check_alpha(alpha)
    if not isinstance(sample, SphericalSample):
        sample = SphericalSample(sample)
    p, n = sample.p, sample.n
    xbar = sample.points.mean(axis=0)
    R = n * p * float(xbar @ xbar)
    return _report("rayleigh", R, DistRef("chisq", (p,)), chisq_sf(R, p), alpha, p=p, n=n)


def watson_loglik_ratio(sample, theta, kappa) -> float:
    """Exact log-likelihood ratio of the Watson(theta, kappa) law against uniformity."""
    if not isinstance(sample, SphericalSample):
        sample = SphericalSample(sample)
    theta = _unit(theta, sample.p)
    if kappa == 0:
        return 0.0
    p, n = sample.p, sample.n
    proj2 = (sample.points @ theta) ** 2
    logc = math.log(normalizing_constant(p, kappa, WATSON)) - math.log(uniform_constant(p))
    return n * logc + kappa * float(np.sum(proj2))


def vec_central_sequence(sample) -> np.ndarray:
    """``p sqrt(n) vec(S_n - I/p)`` (column-major vec)."""
    spec = _as_spectrum(sample)
    p = spec.p
    return p * math.sqrt(spec.n) * (spec.S - np.eye(p) / p).reshape(-1, order="F")


def commutation_matrix(p: int) -> np.ndarray:
    """``K_p`` with ``K_p vec(A) = vec(A')``."""
    K = np.zeros((p * p, p * p))
    for i in range(p):
        for j in range(p):
            K[i * p + j, j * p + i] = 1.0
    return K


def gamma_matrix(p: int) -> np.ndarray:
    """``(p / (p + 2)) (I + K_p - (2/p) J_p)`` with ``J_p = vec(I) vec(I)'``."""
    vi = np.eye(p).reshape(-1, order="F")
    return p / (p + 2.0) * (np.eye(p * p) + commutation_matrix(p) - 2.0 / p * np.outer(vi, vi))
