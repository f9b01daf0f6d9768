"""Fourier priors and their positive-definite kernels.

A prior is a probability measure ``mu`` on frequencies (Hz).  Its kernel is

    k(dt) = integral of exp(-2j*pi*dt*xi) dmu(xi),    dt = t1 - t2,

so ``k(0) == 1`` and ``k(-dt) == conj(k(dt))``.  Every family below has a
closed form except :class:`NumericDensity`, which is integrated numerically.

JSON schema (one object per prior, ``type`` selects the family)::

    {"type": "sparse", "atoms": [[xi, p], ...]}
    {"type": "bandlimited", "F": F}
    {"type": "multiband", "bands": [[center, half_width], ...]}
    {"type": "gaussian", "F": sigma}
    {"type": "cauchy", "F": scale}
    {"type": "gaussian_mixture", "components": [[center, sigma, weight], ...]}
    {"type": "numeric", "support_radius": R, "xi": [...], "density": [...]}
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Sequence

import numpy as np
from scipy import integrate, special

from .errors import (
    NonNormalized,
    NonPositiveScale,
    OverlappingBands,
    PriorError,
    QuadratureNonConvergent,
)

TWO_PI = 2.0 * math.pi
# below this |2*pi*F*dt| the sinc ratio switches to its Taylor series
SINC_TAYLOR_CUTOFF = 1e-6
MASS_TOL = 1e-8


def _sinc2pi(width, dt):
    """sin(2*pi*width*dt) / (2*pi*width*dt) with a series branch near 0."""
    x = TWO_PI * width * np.asarray(dt, dtype=float)
    small = np.abs(x) < SINC_TAYLOR_CUTOFF
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)


def _phase(freq, dt):
    return np.exp(-1j * TWO_PI * freq * np.asarray(dt, dtype=float))


def _scalar_out(dt, value):
    if np.ndim(dt) == 0:
        return complex(value)
    return value


@dataclass(frozen=True)
class Prior:
    """Base class; concrete families are the subclasses below."""

    kind: ClassVar[str] = ""

    def validate(self) -> None:
        raise NotImplementedError

    def kernel(self, dt):
        """Kernel value(s) at lag(s) ``dt``; complex, vectorized."""
        dt = np.asarray(dt, dtype=float)
        return _scalar_out(dt, self._kernel(dt))

    def _kernel(self, dt: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def symmetric(self) -> bool:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    # pieces of the measure for the quadrature oracle:
    # list of (lo, hi, density_fn) with density already including weights
    def _quad_pieces(self, tol: float):
        raise NotImplementedError


@dataclass(frozen=True)
class Sparse(Prior):
    atoms: tuple[tuple[float, float], ...]
    kind: ClassVar[str] = "sparse"

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple((float(f), float(p)) for f, p in self.atoms))

    def validate(self):
        if not self.atoms:
            raise NonNormalized("sparse prior needs at least one atom")
        masses = np.array([p for _, p in self.atoms])
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise NonNormalized("atom masses must be finite and nonnegative")
        if abs(masses.sum() - 1.0) > MASS_TOL:
            raise NonNormalized(f"atom masses sum to {masses.sum():.12g}, expected 1")

    def _kernel(self, dt):
        out = np.zeros(dt.shape, dtype=complex)
        for freq, p in self.atoms:
            out += p * _phase(freq, dt)
        return out

    @property
    def symmetric(self):
        fwd = sorted((round(f, 12), round(p, 12)) for f, p in self.atoms)
        rev = sorted((round(-f, 12), round(p, 12)) for f, p in self.atoms)
        return fwd == rev

    def to_dict(self):
        return {"type": self.kind, "atoms": [list(a) for a in self.atoms]}


@dataclass(frozen=True)
class Bandlimited(Prior):
    """Uniform on ``[-F, F]``."""

    F: float
    kind: ClassVar[str] = "bandlimited"

    def validate(self):
        if not self.F > 0 or not math.isfinite(self.F):
            raise NonPositiveScale(f"bandlimit F must be positive, got {self.F}")

    def _kernel(self, dt):
        return _sinc2pi(self.F, dt).astype(complex)

    @property
    def symmetric(self):
        return True

    def to_dict(self):
        return {"type": self.kind, "F": float(self.F)}

    def _quad_pieces(self, tol):
        h = 1.0 / (2.0 * self.F)
        return [(-self.F, self.F, lambda xi: np.full_like(np.asarray(xi, float), h))]


@dataclass(frozen=True)
class Multiband(Prior):
    """Uniform on a union of disjoint bands ``[c - F, c + F]``."""

    bands: tuple[tuple[float, float], ...]
    kind: ClassVar[str] = "multiband"

    def __post_init__(self):
        object.__setattr__(self, "bands", tuple((float(c), float(w)) for c, w in self.bands))

    def validate(self):
        if not self.bands:
            raise NonNormalized("multiband prior needs at least one band")
        for c, w in self.bands:
            if not w > 0 or not math.isfinite(w) or not math.isfinite(c):
                raise NonPositiveScale(f"band half-width must be positive, got {w}")
        edges = sorted((c - w, c + w) for c, w in self.bands)
        for (lo0, hi0), (lo1, hi1) in zip(edges, edges[1:]):
            if hi0 > lo1:
                raise OverlappingBands(
                    f"bands [{lo0:g}, {hi0:g}] and [{lo1:g}, {hi1:g}] intersect"
                )

    @property
    def total_width(self) -> float:
        return sum(w for _, w in self.bands)

    def _kernel(self, dt):
        total = self.total_width
        out = np.zeros(dt.shape, dtype=complex)
        for c, w in self.bands:
            out += (w / total) * _phase(c, dt) * _sinc2pi(w, dt)
        return out

    @property
    def symmetric(self):
        fwd = sorted((round(c, 12), round(w, 12)) for c, w in self.bands)
        rev = sorted((round(-c, 12), round(w, 12)) for c, w in self.bands)
        return fwd == rev

    def to_dict(self):
        return {"type": self.kind, "bands": [list(b) for b in self.bands]}

    def _quad_pieces(self, tol):
        h = 1.0 / (2.0 * self.total_width)
        return [
            (c - w, c + w, lambda xi: np.full_like(np.asarray(xi, float), h))
            for c, w in self.bands
        ]


def _gaussian_radius(sigma: float, tol: float) -> float:
    return sigma * math.sqrt(2.0 * math.log(10.0 / tol))


@dataclass(frozen=True)
class Gaussian(Prior):
    """Zero-mean Gaussian with standard deviation ``F``."""

    F: float
    kind: ClassVar[str] = "gaussian"

    def validate(self):
        if not self.F > 0 or not math.isfinite(self.F):
            raise NonPositiveScale(f"Gaussian scale must be positive, got {self.F}")

    def _kernel(self, dt):
        return np.exp(-2.0 * math.pi**2 * self.F**2 * dt * dt).astype(complex)

    @property
    def symmetric(self):
        return True

    def to_dict(self):
        return {"type": self.kind, "F": float(self.F)}

    def _quad_pieces(self, tol):
        r = _gaussian_radius(self.F, tol)
        sigma = self.F

        def pdf(xi):
            return np.exp(-0.5 * (np.asarray(xi) / sigma) ** 2) / (sigma * math.sqrt(TWO_PI))

        return [(-r, r, pdf)]


@dataclass(frozen=True)
class CauchyLorentz(Prior):
    """Cauchy-Lorentz density with scale ``F``; kernel is the Laplacian kernel."""

    F: float
    kind: ClassVar[str] = "cauchy"

    def validate(self):
        if not self.F > 0 or not math.isfinite(self.F):
            raise NonPositiveScale(f"Cauchy scale must be positive, got {self.F}")

    def _kernel(self, dt):
        return np.exp(-TWO_PI * self.F * np.abs(dt)).astype(complex)

    @property
    def symmetric(self):
        return True

    def to_dict(self):
        return {"type": self.kind, "F": float(self.F)}

    def pdf(self, xi):
        return 1.0 / (math.pi * self.F * (1.0 + (np.asarray(xi) / self.F) ** 2))


@dataclass(frozen=True)
class GaussianMixture(Prior):
    components: tuple[tuple[float, float, float], ...]
    kind: ClassVar[str] = "gaussian_mixture"

    def __post_init__(self):
        object.__setattr__(
            self,
            "components",
            tuple((float(c), float(s), float(w)) for c, s, w in self.components),
        )

    def validate(self):
        if not self.components:
            raise NonNormalized("mixture needs at least one component")
        for c, s, w in self.components:
            if not s > 0 or not math.isfinite(s) or not math.isfinite(c):
                raise NonPositiveScale(f"component stdev must be positive, got {s}")
            if w < 0 or not math.isfinite(w):
                raise NonNormalized(f"component weight must be nonnegative, got {w}")
        total = sum(w for _, _, w in self.components)
        if abs(total - 1.0) > MASS_TOL:
            raise NonNormalized(f"mixture weights sum to {total:.12g}, expected 1")

    def _kernel(self, dt):
        out = np.zeros(dt.shape, dtype=complex)
        for c, s, w in self.components:
            out += w * _phase(c, dt) * np.exp(-2.0 * math.pi**2 * s * s * dt * dt)
        return out

    @property
    def symmetric(self):
        fwd = sorted(tuple(round(v, 12) for v in comp) for comp in self.components)
        rev = sorted((round(-c, 12), round(s, 12), round(w, 12)) for c, s, w in self.components)
        return fwd == rev

    def to_dict(self):
        return {"type": self.kind, "components": [list(c) for c in self.components]}

    def _quad_pieces(self, tol):
        pieces = []
        k = len(self.components)
        for c, s, w in self.components:
            r = _gaussian_radius(s, tol / k)

            def pdf(xi, c=c, s=s, w=w):
                z = (np.asarray(xi) - c) / s
                return w * np.exp(-0.5 * z * z) / (s * math.sqrt(TWO_PI))

            pieces.append((c - r, c + r, pdf))
        return pieces


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class NumericDensity(Prior):
    """Arbitrary density supported on ``[-support_radius, support_radius]``.

    The density is rescaled to unit mass once, at construction.  ``table``
    holds the ``(xi, density)`` samples when the prior came from a table, so
    that it can be serialized; callables cannot be.
    """

    density: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    _raw_mass: float = field(default=float("nan"), init=False, repr=False, compare=False)
    kind: ClassVar[str] = "numeric"

    def __post_init__(self):
        r = float(self.support_radius)
        object.__setattr__(self, "support_radius", r)
        raw = float("nan")
        if r > 0 and math.isfinite(r):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                raw = integrate.quad(
                    lambda x: float(self.density(np.asarray(x))), -r, r, limit=500,
                    epsabs=1e-14, epsrel=1e-12,
                )[0]
        object.__setattr__(self, "_raw_mass", raw)

    @classmethod
    def from_table(cls, xi: Sequence[float], values: Sequence[float], support_radius=None):
        xi = np.asarray(xi, dtype=float)
        values = np.asarray(values, dtype=float)
        r = float(np.max(np.abs(xi))) if support_radius is None else float(support_radius)
        return cls(
            density=lambda x: np.interp(x, xi, values, left=0.0, right=0.0),
            support_radius=r,
            table=(tuple(xi.tolist()), tuple(values.tolist())),
        )

    def pdf(self, xi):
        return np.asarray(self.density(np.asarray(xi, dtype=float)), dtype=float) / self._raw_mass

    def validate(self):
        r = self.support_radius
        if not r > 0 or not math.isfinite(r):
            raise NonPositiveScale(f"support radius must be positive, got {r}")
        probe = np.asarray(self.density(np.linspace(-r, r, 1025)), dtype=float)
        if np.any(probe < 0) or not np.all(np.isfinite(probe)):
            raise NonNormalized("density must be finite and nonnegative")
        if not (self._raw_mass > 0 and math.isfinite(self._raw_mass)):
            raise NonNormalized("density has no positive finite mass on its support")
        mass = integrate.quad(lambda x: float(self.pdf(x)), -r, r, limit=500)[0]
        if abs(mass - 1.0) > MASS_TOL:
            raise NonNormalized(f"density integrates to {mass:.12g} after normalization")

    def _rule(self, panels: int):
        r = self.support_radius
        edges = np.linspace(-r, r, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        return nodes, weights * self.pdf(nodes)

    def _kernel(self, dt):
        # at most ~half an oscillation of the integrand per panel, >= 64 panels;
        # the panel count is rounded up to a power of two per element so that
        # each value depends only on its own lag
        need = np.maximum(64.0, 4.0 * self.support_radius * np.abs(dt))
        level = np.ceil(np.log2(need)).astype(int)
        out = np.zeros(dt.shape, dtype=complex)
        for lev in np.unique(level):
            mask = level == lev
            sub = dt[mask]
            acc = np.zeros(sub.shape, dtype=complex)
            nodes, weights = self._rule(2 ** int(lev))
            for xi, w in zip(nodes, weights):
                if w != 0.0:
                    acc += w * _phase(xi, sub)
            out[mask] = acc
        return out

    @property
    def symmetric(self):
        r = self.support_radius
        grid = np.linspace(0.0, r, 257)
        a, b = self.pdf(grid), self.pdf(-grid)
        return bool(np.all(np.abs(a - b) <= 1e-12 * max(1.0, float(np.max(np.abs(a))))))

    def to_dict(self):
        if self.table is None:
            raise TypeError("only table-backed numeric densities can be serialized")
        xi, values = self.table
        return {
            "type": self.kind,
            "support_radius": self.support_radius,
            "xi": list(xi),
            "density": list(values),
        }

    def _quad_pieces(self, tol):
        r = self.support_radius
        return [(-r, r, self.pdf)]


def validate(prior: Prior) -> None:
    """Raise a :class:`PriorError` subclass unless every invariant holds."""
    if not isinstance(prior, Prior):
        raise PriorError(f"not a prior: {prior!r}")
    prior.validate()


def kernel_value(prior: Prior, dt):
    """Closed-form kernel ``k(dt)``; scalar in, complex out (arrays vectorize)."""
    return prior.kernel(dt)


def _checked_quad(*args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(*args, **kwargs)[:2]
        except integrate.IntegrationWarning as exc:
            raise QuadratureNonConvergent(str(exc).strip().splitlines()[0]) from exc
    return value, abserr


def _oscillatory(pdf, lo, hi, omega, tol, limit):
    """Integrals of pdf*cos(omega*xi) and pdf*sin(omega*xi) over [lo, hi]."""
    f = lambda x: float(pdf(x))  # noqa: E731
    if omega == 0.0:
        re, _ = _checked_quad(f, lo, hi, epsabs=tol, epsrel=0.0, limit=limit)
        return re, 0.0
    re, _ = _checked_quad(f, lo, hi, weight="cos", wvar=omega, epsabs=tol, epsrel=0.0, limit=limit)
    im, _ = _checked_quad(f, lo, hi, weight="sin", wvar=omega, epsabs=tol, epsrel=0.0, limit=limit)
    return re, im


def kernel_quadrature(prior: Prior, dt: float, tol: float = 1e-10, limit: int = 2000) -> complex:
    """Numerical estimate of the kernel integral with absolute error <= ``tol``.

    Independent of the closed forms: densities are integrated against
    ``cos``/``sin`` with QUADPACK's oscillatory rules.  Unbounded Gaussian
    supports are truncated where the tail mass drops below ``tol/10``; the
    Cauchy family uses the semi-infinite Fourier rule instead of truncation.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    dt = float(dt)
    if isinstance(prior, Sparse):
        return complex(sum(p * np.exp(-1j * TWO_PI * f * dt) for f, p in prior.atoms))
    omega = TWO_PI * dt
    sign = 1.0 if omega >= 0 else -1.0
    omega = abs(omega)
    if isinstance(prior, CauchyLorentz):
        half = lambda x: 2.0 * float(prior.pdf(x))  # noqa: E731
        if omega == 0.0:
            re, _ = _checked_quad(half, 0.0, np.inf, epsabs=tol / 2, epsrel=0.0, limit=limit)
        else:
            re, _ = _checked_quad(half, 0.0, np.inf, weight="cos", wvar=omega,
                                  epsabs=tol / 2, epsrel=0.0, limlst=200, limit=limit)
        # odd part vanishes for a density symmetric about zero
        return complex(re, 0.0)
    pieces = prior._quad_pieces(tol)
    budget = tol / (4.0 * len(pieces))
    re_total = im_total = 0.0
    for lo, hi, pdf in pieces:
        re, im = _oscillatory(pdf, lo, hi, omega, budget, limit)
        re_total += re
        im_total += im
    return complex(re_total, -sign * im_total)


def prior_from_dict(data: dict) -> Prior:
    """Build and validate a prior from its JSON object form."""
    kind = data.get("type")
    if kind == "sparse":
        prior = Sparse(tuple(tuple(a) for a in data["atoms"]))
    elif kind == "bandlimited":
        prior = Bandlimited(float(data["F"]))
    elif kind == "multiband":
        prior = Multiband(tuple(tuple(b) for b in data["bands"]))
    elif kind == "gaussian":
        prior = Gaussian(float(data["F"]))
    elif kind == "cauchy":
        prior = CauchyLorentz(float(data["F"]))
    elif kind == "gaussian_mixture":
        prior = GaussianMixture(tuple(tuple(c) for c in data["components"]))
    elif kind == "numeric":
        prior = NumericDensity.from_table(data["xi"], data["density"], data.get("support_radius"))
    else:
        raise PriorError(f"unknown prior type {kind!r}")
    prior.validate()
    return prior


def prior_from_json(text: str) -> Prior:
    return prior_from_dict(json.loads(text))


def density_tail_mass(prior: Prior, radius: float) -> float:
    """Mass of ``prior`` outside ``[-radius, radius]`` for the centered families."""
    if isinstance(prior, Gaussian):
        return float(special.erfc(radius / (prior.F * math.sqrt(2.0))))
    if isinstance(prior, CauchyLorentz):
        return float(1.0 - 2.0 / math.pi * math.atan(radius / prior.F))
    raise TypeError(f"tail mass not available for {type(prior).__name__}")
