"""Axial rotationally symmetric distributions on the unit sphere.

A model is indexed by a location axis ``theta``, a concentration ``kappa``
and an angular function ``f``; its density on S^{p-1} is proportional to
``f(kappa * (x' theta)**2)``. ``kappa > 0`` gives bipolar alternatives,
``kappa < 0`` girdle alternatives, and ``kappa = 0`` the uniform law.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .numerics import NumericalError, RngStream

__all__ = [
    "AngularFunction",
    "WATSON",
    "LINEAR",
    "AxialModel",
    "SphericalSample",
    "DegenerateModelError",
    "uniform_constant",
    "normalizing_constant",
    "density",
    "sample_uniform_sphere",
    "sample_axial",
    "AxialSampler",
    "moment_gf",
    "moment_integral",
]

_GRID = 1024
_UNIT_TOL = 1e-8


class DegenerateModelError(ValueError):
    """Model parameters give a non-positive or non-monotone density."""


@dataclass(frozen=True)
class AngularFunction:
    """Angular function ``f`` with ``f(0) = f'(0) = 1``.

    ``eval`` must accept numpy arrays. ``d1_at_0`` and ``d2_at_0`` record
    the first two derivatives at the origin.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    d1_at_0: float = 1.0
    d2_at_0: float = 0.0
    label: str = "custom"

    def __call__(self, z):
        return self.eval(np.asarray(z, dtype=float))

    def check_monotone(self, lo: float, hi: float, npts: int = _GRID) -> bool:
        """Grid check that ``f`` is nondecreasing on ``[lo, hi]``."""
        if lo == hi:
            return True
        vals = self(np.linspace(lo, hi, npts))
        return bool(np.all(np.diff(vals) >= -1e-12 * np.maximum(1.0, np.abs(vals[1:]))))


WATSON = AngularFunction(np.exp, 1.0, 1.0, "watson")
LINEAR = AngularFunction(lambda z: 1.0 + z, 1.0, 0.0, "linear")


@dataclass(frozen=True)
class AxialModel:
    p: int
    theta: np.ndarray
    kappa: float = 0.0
    f: AngularFunction = WATSON

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ValueError(f"dimension p must be an integer >= 2, got {self.p!r}")
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if theta.size != self.p:
            raise ValueError(f"theta has length {theta.size}, expected p={self.p}")
        if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
            raise ValueError("theta must be a unit vector")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "kappa", float(self.kappa))
        vals = self.f(self.kappa * np.linspace(-1.0, 1.0, _GRID) ** 2)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise DegenerateModelError(
                f"f({self.kappa} s^2) is not positive on [-1, 1] for f={self.f.label}")
        # f is only ever evaluated on kappa * [0, 1]
        if not self.f.check_monotone(min(0.0, self.kappa), max(0.0, self.kappa)):
            raise DegenerateModelError(f"f={self.f.label} is not nondecreasing on its range")

    @classmethod
    def standard(cls, p, kappa=0.0, f=WATSON):
        """Model with location ``theta = e_1``."""
        theta = np.zeros(p)
        theta[0] = 1.0
        return cls(p, theta, kappa, f)


@dataclass(frozen=True)
class SphericalSample:
    """``n`` unit vectors in R^p, stored row-wise."""

    points: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, dtype=float)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 2:
            raise ValueError("points must be an (n, p) array with n >= 1 and p >= 2")
        dev = np.abs(np.linalg.norm(x, axis=1) - 1.0)
        if np.any(dev > _UNIT_TOL):
            bad = int(np.argmax(dev))
            raise ValueError(f"row {bad} is not a unit vector (|norm - 1| = {dev[bad]:.3g})")
        object.__setattr__(self, "points", x)

    @classmethod
    def from_array(cls, points, renormalize=False):
        x = np.asarray(points, dtype=float)
        if renormalize:
            norms = np.linalg.norm(x, axis=1, keepdims=True)
            if np.any(norms == 0):
                raise ValueError("cannot renormalize a zero vector")
            x = x / norms
        return cls(x)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]


def uniform_constant(p: int) -> float:
    """``c_p = Gamma(p/2) / (sqrt(pi) Gamma((p-1)/2))``, the kappa = 0 constant."""
    return math.exp(special.gammaln(p / 2) - special.gammaln((p - 1) / 2)) / math.sqrt(math.pi)


@functools.lru_cache(maxsize=16)
def _gauss_nodes(n):
    # mapped to [-pi/2, pi/2]; building the rule costs far more than using it
    x, w = leggauss(n)
    u, wu = 0.5 * math.pi * x, 0.5 * math.pi * w
    u.flags.writeable = wu.flags.writeable = False
    return u, wu


def _sphere_integral(p, h, tol=1e-11, nodes=256, max_nodes=1 << 15):
    """``int_{-1}^{1} (1 - s^2)^{(p-3)/2} h(s^2) ds``.

    Computed as ``int cos^{p-2}(u) h(sin^2 u) du`` over [-pi/2, pi/2], which
    removes the endpoint singularity at p = 2. Gauss-Legendre node count is
    doubled until two successive values agree.
    """
    prev = None
    while nodes <= max_nodes:
        u, w = _gauss_nodes(nodes)
        val = float(np.sum(w * np.cos(u) ** (p - 2) * h(np.sin(u) ** 2)))
        if not math.isfinite(val):
            raise NumericalError("non-finite quadrature value")
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
        nodes *= 2
    raise NumericalError("Gauss-Legendre quadrature did not converge")


def normalizing_constant(p: int, kappa: float, f: AngularFunction = WATSON) -> float:
    """``c_{p,kappa,f} = 1 / int (1 - s^2)^{(p-3)/2} f(kappa s^2) ds``."""
    if kappa == 0:
        return uniform_constant(p)
    vals = f(kappa * np.linspace(-1.0, 1.0, _GRID) ** 2)
    if np.any(vals <= 0):
        raise DegenerateModelError("integrand is not positive")
    return 1.0 / _sphere_integral(p, lambda z: f(kappa * z))


def density(model: AxialModel, x):
    """Density of ``model`` at ``x`` (a unit vector or an (n, p) array) w.r.t. surface area."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.p:
        raise ValueError("dimension mismatch")
    if np.any(np.abs(np.linalg.norm(x, axis=-1) - 1.0) > _UNIT_TOL):
        raise ValueError("x must be unit vector(s)")
    p = model.p
    c = normalizing_constant(p, model.kappa, model.f)
    lead = c * math.exp(special.gammaln((p - 1) / 2)) / (2.0 * math.pi ** ((p - 1) / 2))
    out = lead * model.f(model.kappa * (x @ model.theta) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def sample_uniform_sphere(p: int, n: int, stream: RngStream) -> SphericalSample:
    """Uniform sample on S^{p-1} by normalizing standard Gaussian vectors."""
    if p < 2 or n < 1:
        raise ValueError("need p >= 2 and n >= 1")
    g = stream.normal((n, p))
    return SphericalSample(g / np.linalg.norm(g, axis=1, keepdims=True))


def _orthocomplement(theta):
    """Columns 2..p of the Householder reflection sending e_1 to theta."""
    p = theta.size
    v = theta.copy()
    v[0] -= 1.0
    vv = v @ v
    if vv < 1e-30:
        return np.eye(p)[:, 1:]
    H = np.eye(p) - 2.0 * np.outer(v, v) / vv
    return H[:, 1:]


class AxialSampler:
    """Precomputed inverse-CDF grid and complement basis for repeated draws.

    Uses the tangent-normal decomposition ``X = t theta + sqrt(1 - t^2) U``:
    ``t = sin(u)`` with ``u = arcsin(X' theta)`` drawn by inverse-CDF
    interpolation on a 4096-point grid, and ``U`` uniform on the unit sphere
    of the orthogonal complement of ``theta``.
    """

    def __init__(self, model: AxialModel, npts: int = 4096):
        self.model = model
        u = np.linspace(-0.5 * math.pi, 0.5 * math.pi, npts)
        dens = np.cos(u) ** (model.p - 2) * model.f(model.kappa * np.sin(u) ** 2)
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(u))))
        self._u = u
        self._cdf = cdf / cdf[-1]
        self._basis_t = _orthocomplement(model.theta).T
        # theta = e_1 needs no basis change
        self._on_e1 = bool(model.theta[0] == 1.0)

    def draw(self, n: int, stream: RngStream) -> np.ndarray:
        """Raw ``(n, p)`` array of draws."""
        if n < 1:
            raise ValueError("n must be >= 1")
        p = self.model.p
        t = np.sin(np.interp(stream.uniform(n), self._cdf, self._u))
        g = stream.normal((n, p - 1))
        r = np.sqrt(np.clip(1.0 - t * t, 0.0, None)) / np.linalg.norm(g, axis=1)
        if self._on_e1:
            x = np.empty((n, p))
            x[:, 0] = t
            x[:, 1:] = r[:, None] * g
        else:
            x = t[:, None] * self.model.theta + r[:, None] * (g @ self._basis_t)
        return x


def sample_axial(model: AxialModel, n: int, stream: RngStream) -> SphericalSample:
    """Draw ``n`` points from ``model``; see :class:`AxialSampler`."""
    return SphericalSample(AxialSampler(model).draw(n, stream))


def moment_gf(p: int, kappa: float, f: AngularFunction = WATSON) -> float:
    """``g_f(kappa) = E[(X' theta)^2]`` under the model with concentration ``kappa``."""
    if kappa == 0:
        return 1.0 / p
    num = _sphere_integral(p, lambda z: z * f(kappa * z))
    den = _sphere_integral(p, lambda z: f(kappa * z))
    return num / den


def moment_integral(p: int, kappa: float, g: Callable) -> float:
    """``c_p int (1 - s^2)^{(p-3)/2} g(kappa s^2) ds``, i.e. ``E_0[g(kappa (X' theta)^2)]``."""
    return uniform_constant(p) * _sphere_integral(p, lambda z: np.asarray(g(kappa * z), dtype=float))
