"""Sampling densities on ``[0, T]`` and weighted sample sets.

Three densities are provided, all symmetric about ``T/2`` and all with a
closed-form (unnormalized) CDF so that sampling is exact inverse-transform:

* universal: ``alpha / (256 min(t, T-t))`` in the interior, capped at
  ``alpha**6 / T`` on the two edge strips of width ``T / alpha**6``;
* bandlimited: ``(4 + q / sqrt(min(t, T-t)/T)) / T`` with
  ``q = ceil(16 pi e F T + 2 ln(1/eps) + 11)``;
* uniform: ``mass / T``.

Random draws use numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence``.  Independent streams for parallel work are
obtained with :func:`spawn_seeds`, which derives child seeds from
``SeedSequence(seed).spawn``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import AlphaTooSmall, DomainError

UNIVERSAL = "universal"
BANDLIMITED = "bandlimited"
UNIFORM = "uniform"

DEFAULT_C = 5.0
DEFAULT_DELTA = 0.2


@dataclass(frozen=True)
class SamplingDensity:
    """Piecewise closed-form density over ``[0, T]``.

    Attributes
    ----------
    kind : str
        ``"universal"``, ``"bandlimited"`` or ``"uniform"``.
    T : float
        Window length in seconds.
    mass : float
        Integral of the unnormalized density over ``[0, T]``.
    alpha, F, epsilon, q : optional
        Family parameters; unused ones are ``None``.
    """

    kind: str
    T: float
    mass: float
    alpha: float | None = None
    F: float | None = None
    epsilon: float | None = None
    q: int | None = None

    # -- unnormalized density and CDF -------------------------------------
    def density(self, t):
        t = np.asarray(t, dtype=float)
        T = self.T
        m = np.minimum(t, T - t)
        if self.kind == UNIVERSAL:
            a = self.alpha
            edge = T / a**6
            interior = a / (256.0 * np.where(m > edge, m, 1.0))
            return np.where(m > edge, interior, a**6 / T)
        if self.kind == BANDLIMITED:
            with np.errstate(divide="ignore"):
                return (4.0 + self.q / np.sqrt(m / T)) / T
        return np.full_like(t, self.mass / T)

    def _half_cdf(self, m):
        """Unnormalized CDF on ``[0, T/2]``."""
        T = self.T
        if self.kind == UNIVERSAL:
            a = self.alpha
            edge = T / a**6
            safe = np.where(m > edge, m, edge)
            return np.where(m > edge, 1.0 + (a / 256.0) * np.log(safe / edge), m / edge)
        x = m / T
        return 4.0 * x + 2.0 * self.q * np.sqrt(x)

    def _half_inverse(self, v):
        """Inverse of :meth:`_half_cdf` for ``v`` in ``[0, mass/2]``."""
        T = self.T
        if self.kind == UNIVERSAL:
            a = self.alpha
            edge = T / a**6
            return np.where(v <= 1.0, v * edge, edge * np.exp((v - 1.0) * 256.0 / a))
        q = self.q
        r = v / (q + np.sqrt(q * q + 4.0 * v))
        return T * r * r

    def cdf(self, t):
        """Normalized CDF, clipped to ``[0, 1]`` outside the window."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.T)
        if self.kind == UNIFORM:
            return t / self.T
        half = self.mass / 2.0
        left = t <= self.T / 2.0
        g = np.where(left, self._half_cdf(t), self.mass - self._half_cdf(self.T - t))
        return np.where(left, g, np.maximum(g, half)) / self.mass

    def inverse_cdf(self, u):
        """Time ``t`` with ``cdf(t) == u``; vectorized.

        Raises
        ------
        DomainError
            If any ``u`` lies outside ``[0, 1]``.
        """
        u_arr = np.asarray(u, dtype=float)
        if np.any(~(u_arr >= 0.0) | ~(u_arr <= 1.0)):
            raise DomainError("u must lie in [0, 1]")
        if self.kind == UNIFORM:
            out = u_arr * self.T
        else:
            v = u_arr * self.mass
            half = self.mass / 2.0
            lo = self._half_inverse(np.minimum(v, half))
            hi = self.T - self._half_inverse(np.maximum(self.mass - v, 0.0))
            out = np.where(v <= half, lo, hi)
        out = np.clip(out, 0.0, self.T)
        return float(out) if np.ndim(u) == 0 else out

    def params(self) -> dict:
        out = {"kind": self.kind, "T": self.T, "mass": self.mass}
        for key in ("alpha", "F", "epsilon", "q"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out

    @classmethod
    def from_params(cls, d: dict) -> "SamplingDensity":
        if d["kind"] == UNIVERSAL:
            return universal_density(d["alpha"], d["T"])
        if d["kind"] == BANDLIMITED:
            return bandlimited_density(d["F"], d["T"], d["epsilon"])
        return uniform_density(d["T"], d.get("mass", 1.0))


def universal_density(alpha: float, T: float) -> SamplingDensity:
    """Spectrum-blind density with edge caps; needs ``alpha >= 128``."""
    if not alpha >= 128:
        raise AlphaTooSmall(f"alpha must be >= 128, got {alpha}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    alpha = float(alpha)
    mass = 2.0 + (alpha / 128.0) * math.log(alpha**6 / 2.0)
    return SamplingDensity(UNIVERSAL, float(T), mass, alpha=alpha)


def bandlimited_q(F: float, T: float, epsilon: float) -> int:
    return int(math.ceil(16.0 * math.pi * math.e * F * T + 2.0 * math.log(1.0 / epsilon) + 11.0))


def bandlimited_density(F: float, T: float, epsilon: float) -> SamplingDensity:
    """Density tailored to priors uniform on ``[-F, F]``."""
    if not (F > 0 and T > 0):
        raise DomainError("F and T must be positive")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    q = bandlimited_q(F, T, epsilon)
    mass = 2.0 * math.sqrt(2.0) * q + 4.0
    return SamplingDensity(BANDLIMITED, float(T), mass, F=float(F), epsilon=float(epsilon), q=q)


def uniform_density(T: float, mass: float = 1.0) -> SamplingDensity:
    if not (T > 0 and mass > 0):
        raise DomainError("T and mass must be positive")
    return SamplingDensity(UNIFORM, float(T), float(mass))


def recommended_sample_count(mass: float, delta: float = DEFAULT_DELTA, c: float = DEFAULT_C) -> int:
    """``ceil(c * mass * (ln(mass) + 1/delta))``.

    ``delta = 1`` is accepted as the boundary case of the failure probability.
    """
    if not mass >= 1:
        raise DomainError(f"mass must be >= 1, got {mass}")
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    return int(math.ceil(c * mass * (math.log(mass) + 1.0 / delta)))


def spawn_seeds(seed: int, k: int) -> list[int]:
    """Derive ``k`` independent 64-bit child seeds from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(k)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


@dataclass(frozen=True)
class SampleSet:
    times: np.ndarray
    weights: np.ndarray
    density: SamplingDensity
    seed: int
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.times)

    def provenance(self) -> dict:
        return {"density": self.density.params(), "seed": int(self.seed), "s": len(self), **self.meta}

    def to_csv(self, path) -> Path:
        rows = ((i, t, w) for i, (t, w) in enumerate(zip(self.times, self.weights)))
        out = io.write_csv(path, ["index", "t", "w"], rows)
        io.write_json(Path(path).with_suffix(".json"), self.provenance())
        return out

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        _, rows = io.read_csv(path)
        prov = io.read_json(Path(path).with_suffix(".json"))
        times = np.array([float(r[1]) for r in rows])
        weights = np.array([float(r[2]) for r in rows])
        extra = {k: v for k, v in prov.items() if k not in ("density", "seed", "s")}
        return cls(times, weights, SamplingDensity.from_params(prov["density"]), prov["seed"], extra)


def sample_weights(density: SamplingDensity, times) -> np.ndarray:
    s = len(times)
    return np.sqrt(density.mass / (s * density.T * density.density(times)))


def draw_samples(density: SamplingDensity, s: int, seed: int) -> SampleSet:
    """Draw ``s`` i.i.d. nodes by inverse transform and attach their weights."""
    if int(s) != s or s < 1:
        raise DomainError(f"sample count must be a positive integer, got {s}")
    rng = np.random.default_rng(seed)
    times = np.asarray(density.inverse_cdf(rng.random(int(s))))
    return SampleSet(times, sample_weights(density, times), density, int(seed))
