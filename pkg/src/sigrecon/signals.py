"""Test signals with known prior energy, fixed noise functions and error norms.

A synthetic signal is a kernel expansion ``y(t) = sum_j c_j k(s_j - t)``.  Its
frequency-domain representation is ``x(xi) = sum_j c_j exp(-2j pi xi s_j)``, so
the prior energy ``int |x|^2 dmu`` is the Hermitian form ``c^H M c`` with
``M[j, l] = k(s_l - s_j)``.

Also here: the truncated Whittaker-Shannon interpolant used as a baseline and
the bandlimited signal on which it needs many samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, NonEquispaced, OutOfRange
from .measure import Bandlimited, Prior

EVAL_CHUNK = 256


@dataclass(frozen=True)
class SyntheticSignal:
    prior: Prior
    times: np.ndarray
    coeffs: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        flat = t_arr.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for start in range(0, flat.size, EVAL_CHUNK):
            block = flat[start:start + EVAL_CHUNK]
            kmat = self.prior.kernel(self.times[None, :] - block[:, None])
            out[start:start + EVAL_CHUNK] = kmat @ self.coeffs
        return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)

    @property
    def energy(self) -> float:
        """Prior energy ``c^H M c``; real and nonnegative up to rounding."""
        gram = self.prior.kernel(self.times[None, :] - self.times[:, None])
        val = np.vdot(self.coeffs, gram @ self.coeffs)
        assert abs(val.imag) <= 1e-10 * max(abs(val.real), 1e-300) + 1e-14
        return float(max(val.real, 0.0))

    def to_dict(self) -> dict:
        return {
            "type": "synthetic",
            "prior": self.prior.to_dict(),
            "atoms": [[float(s), float(c.real), float(c.imag)] for s, c in zip(self.times, self.coeffs)],
        }


@dataclass(frozen=True)
class TableSignal:
    """Linearly interpolated samples; querying outside the table raises."""

    times: np.ndarray
    values: np.ndarray
    energy: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size < 2 or np.any(np.diff(t) <= 0):
            raise DomainError("table times must be strictly increasing (>= 2 points)")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any((t_arr < self.times[0]) | (t_arr > self.times[-1])):
            raise OutOfRange(f"query outside table range [{self.times[0]}, {self.times[-1]}]")
        re = np.interp(t_arr, self.times, self.values.real)
        im = np.interp(t_arr, self.times, self.values.imag)
        out = re + 1j * im
        return complex(out) if t_arr.ndim == 0 else out


# -- noise ----------------------------------------------------------------

@dataclass(frozen=True)
class NoNoise:
    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        return 0j if t_arr.ndim == 0 else np.zeros(t_arr.shape, dtype=complex)

    def energy(self, T: float) -> float:
        return 0.0

    def to_dict(self):
        return {"type": "none"}


@dataclass(frozen=True)
class SinusoidNoise:
    """``amplitude * sin(2 pi frequency t + phase)``."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = self.amplitude * np.sin(2 * math.pi * self.frequency * t_arr + self.phase)
        return complex(out) if t_arr.ndim == 0 else out.astype(complex)

    def energy(self, T: float) -> float:
        """Exact ``(1/T) int_0^T n(t)^2 dt``."""
        a, f, p = self.amplitude, self.frequency, self.phase
        if f == 0:
            return a * a * math.sin(p) ** 2
        w = 4 * math.pi * f
        return a * a / 2.0 - a * a * (math.sin(w * T + 2 * p) - math.sin(2 * p)) / (2.0 * w * T)

    def to_dict(self):
        return {"type": "sinusoid", "amplitude": self.amplitude, "frequency": self.frequency,
                "phase": self.phase}

    @classmethod
    def with_energy(cls, energy: float, T: float, periods: int = 7) -> "SinusoidNoise":
        """Noise with an integer number of periods on ``[0, T]`` and the given energy."""
        return cls(math.sqrt(2.0 * energy), periods / T, 0.0)


@dataclass(frozen=True)
class SeededGridNoise:
    """Gaussian values on the grid ``k * step`` covering ``[0, T]``, linearly interpolated."""

    seed: int
    step: float
    amplitude: float
    T: float

    def __post_init__(self):
        if not (self.step > 0 and self.T > 0):
            raise DomainError("step and T must be positive")

    def _table(self):
        count = int(math.ceil(self.T / self.step)) + 1
        knots = np.arange(count) * self.step
        vals = self.amplitude * np.random.default_rng(self.seed).standard_normal(count)
        return knots, vals

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        knots, vals = self._table()
        if np.any((t_arr < 0) | (t_arr > knots[-1])):
            raise OutOfRange("noise queried outside its table")
        out = np.interp(t_arr, knots, vals)
        return complex(out) if t_arr.ndim == 0 else out.astype(complex)

    def energy(self, T: float | None = None) -> float:
        """Exact mean square of the piecewise-linear table over ``[0, T]``."""
        T = self.T if T is None else T
        knots, vals = self._table()
        if T > knots[-1]:
            raise OutOfRange("window exceeds the noise table")
        total = 0.0
        for x0, x1, a, b in zip(knots[:-1], knots[1:], vals[:-1], vals[1:]):
            if x0 >= T:
                break
            length = min(x1, T) - x0
            c = a + (b - a) * length / (x1 - x0)
            total += length * (a * a + a * c + c * c) / 3.0
        return total / T

    def to_dict(self):
        return {"type": "seeded_grid", "seed": self.seed, "step": self.step,
                "amplitude": self.amplitude, "T": self.T}


def noise_from_dict(d: dict):
    kind = d.get("type", "none")
    if kind == "none":
        return NoNoise()
    if kind == "sinusoid":
        return SinusoidNoise(float(d["amplitude"]), float(d["frequency"]), float(d.get("phase", 0.0)))
    if kind == "seeded_grid":
        return SeededGridNoise(int(d["seed"]), float(d["step"]), float(d["amplitude"]), float(d["T"]))
    raise DomainError(f"unknown noise type {kind!r}")


# -- construction and queries --------------------------------------------

def synth_signal(prior: Prior, atoms) -> SyntheticSignal:
    """Kernel expansion from ``(s_j, c_j)`` pairs."""
    atoms = list(atoms)
    if not atoms:
        raise DomainError("synthetic signal needs at least one atom")
    times = np.array([float(s) for s, _ in atoms])
    coeffs = np.array([complex(c) for _, c in atoms])
    sig = SyntheticSignal(prior, times, coeffs)
    sig.energy  # noqa: B018  (runs the Hermitian-form check)
    return sig


def random_synthetic(prior: Prior, T: float, n_atoms: int, seed: int, real: bool = False) -> SyntheticSignal:
    """Unit-energy signal with atoms uniform in ``[0, T]`` and Gaussian coefficients."""
    rng = np.random.default_rng(seed)
    times = rng.uniform(0.0, T, n_atoms)
    c = rng.standard_normal(n_atoms)
    if not real:
        c = c + 1j * rng.standard_normal(n_atoms)
    sig = SyntheticSignal(prior, times, np.asarray(c, dtype=complex))
    e = sig.energy
    if not e > 0:
        raise DomainError("degenerate atoms: zero energy")
    return SyntheticSignal(prior, times, sig.coeffs / math.sqrt(e), {"seed": int(seed)})


def signal_from_dict(d: dict):
    from .measure import prior_from_dict

    if d["type"] == "synthetic":
        prior = prior_from_dict(d["prior"])
        return synth_signal(prior, [(s, complex(re, im)) for s, re, im in d["atoms"]])
    raise DomainError(f"unknown signal type {d['type']!r}")


def query(signal, noise, t):
    """Observed value ``y(t) + n(t)``."""
    return signal(t) + noise(t)


class MSE(NamedTuple):
    value: float
    value_2n: float
    discrepancy: float


def _midpoint_ms(diff: Callable, T: float, n: int) -> float:
    t = (np.arange(n) + 0.5) * (T / n)
    d = np.asarray(diff(t))
    return float(np.mean(np.abs(d) ** 2))


def mean_sq_error(f, g, T: float, n_quad: int = 4096) -> MSE:
    """Composite-midpoint ``(1/T) int_0^T |f - g|^2`` with a doubling check.

    ``f`` and ``g`` are vectorized callables (``g`` may be ``None`` for zero).
    """
    if n_quad < 64:
        raise DomainError("n_quad must be >= 64")
    if g is None:
        diff = f
    else:
        def diff(t):
            return np.asarray(f(t)) - np.asarray(g(t))
    a = _midpoint_ms(diff, T, n_quad)
    b = _midpoint_ms(diff, T, 2 * n_quad)
    return MSE(a, b, abs(b - a))


# -- Whittaker-Shannon baseline ------------------------------------------

def ws_truncated(times, values, t, F: float | None = None):
    """Sinc interpolation ``sum_k y_k sinc(2F (t - t_k))`` over the given window.

    The spacing of ``times`` must be constant; ``F`` defaults to
    ``1 / (2 * spacing)``.  An empty window gives 0.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=complex)
    t_arr = np.asarray(t, dtype=float)
    if times.size == 0:
        return 0j if t_arr.ndim == 0 else np.zeros(t_arr.shape, dtype=complex)
    if times.size >= 2:
        steps = np.diff(times)
        h = float(steps.mean())
        if np.any(np.abs(steps - h) > 1e-9 * max(abs(h), 1.0)) or h <= 0:
            raise NonEquispaced("sample times are not equispaced")
        if F is not None and abs(2.0 * F * h - 1.0) > 1e-9:
            raise NonEquispaced(f"spacing {h} is not 1/(2F) for F={F}")
    elif F is None:
        raise DomainError("a single sample needs an explicit bandlimit F")
    else:
        h = 1.0 / (2.0 * F)
    flat = t_arr.ravel()
    out = np.sinc((flat[:, None] - times[None, :]) / h) @ values
    return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def adversarial_ws_instance(epsilon: float) -> SyntheticSignal:
    """Sum of unit sincs at the even integers in ``[floor(1/(2 eps)), floor(1/eps)]``.

    The prior is bandlimited with ``F = 1/2``; the sincs are orthonormal in
    the prior norm, so the energy is the number of atoms (``meta["energy"]``).
    """
    if not 0 < epsilon <= 0.1:
        raise DomainError("epsilon must lie in (0, 0.1]")
    lo, hi = math.floor(1.0 / (2.0 * epsilon)), math.floor(1.0 / epsilon)
    evens = [k for k in range(lo, hi + 1) if k % 2 == 0]
    return SyntheticSignal(Bandlimited(0.5), np.array(evens, dtype=float),
                           np.ones(len(evens), dtype=complex), {"energy": float(len(evens))})
