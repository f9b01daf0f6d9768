"""Kernel ridge regression over weighted samples, and evaluation of the fit.

Given nodes ``t_i`` with weights ``w_i`` and raw observations ``y_i``, the fit
solves ``(K + eps I) zbar = ybar`` with ``K[i, j] = w_i w_j k(t_i - t_j)`` and
``ybar_i = w_i y_i``, then stores ``z_i = zbar_i w_i``.  The reconstruction is
``ytilde(t) = sum_i z_i k(t_i - t)``.

When ``eps`` is at least the operator norm of the kernel operator the zero
function already meets the error guarantee; no special case is made and the
solve runs as usual.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import io
from .density import SampleSet
from .errors import DimensionMismatch, DomainError, SolveFailure
from .measure import Prior, prior_from_dict

RESIDUAL_RTOL = 1e-8
JITTER = 1e-12
# rows of the (points x nodes) kernel block evaluated at once
EVAL_CHUNK = 256


def assemble_kernel_matrix(prior: Prior, samples: SampleSet) -> np.ndarray:
    """Weighted Gram matrix ``K[i, j] = w_i w_j k(t_i - t_j)``."""
    t = np.asarray(samples.times, dtype=float)
    w = np.asarray(samples.weights, dtype=float)
    if t.size == 0:
        raise DimensionMismatch("empty sample set")
    kmat = w[:, None] * prior.kernel(t[:, None] - t[None, :]) * w[None, :]
    # mirror the upper triangle so the matrix is Hermitian to the last bit
    upper = np.triu(kmat, 1)
    return upper + upper.conj().T + np.diag(np.diag(kmat).real)


@dataclass(frozen=True)
class ReconModel:
    prior: Prior
    nodes: np.ndarray
    coeffs: np.ndarray
    epsilon: float
    T: float
    provenance: dict = field(default_factory=dict, compare=False)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return evaluate(self, float(t_arr))
        return evaluate_batch(self, t_arr)

    def to_dict(self) -> dict:
        return {
            "prior": self.prior.to_dict(),
            "nodes": [float(x) for x in self.nodes],
            "coeffs": [[float(z.real), float(z.imag)] for z in self.coeffs],
            "epsilon": float(self.epsilon),
            "T": float(self.T),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReconModel":
        coeffs = np.array([complex(re, im) for re, im in d["coeffs"]], dtype=complex)
        return cls(
            prior_from_dict(d["prior"]),
            np.array(d["nodes"], dtype=float),
            coeffs,
            float(d["epsilon"]),
            float(d["T"]),
            d.get("provenance", {}),
        )

    def save(self, path):
        return io.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "ReconModel":
        return cls.from_dict(io.read_json(path))


def _solve_hpd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        jitter = JITTER * float(np.real(np.trace(A)))
        try:
            factor = linalg.cho_factor(A + jitter * np.eye(len(A)), lower=True)
        except (linalg.LinAlgError, ValueError) as exc:
            raise SolveFailure(f"Cholesky failed after jitter {jitter:.3g}: {exc}") from exc
    return linalg.cho_solve(factor, b)


def fit(prior: Prior, samples: SampleSet, observations, epsilon: float) -> ReconModel:
    """Regularized kernel fit to raw observations ``y(t_i) + n(t_i)``.

    Parameters
    ----------
    prior : Prior
    samples : SampleSet
    observations : array_like of complex, shape (s,)
        Unweighted values at ``samples.times``; weighting happens here.
    epsilon : float
        Ridge parameter, > 0.

    Raises
    ------
    DimensionMismatch
        If the number of observations differs from the number of nodes.
    SolveFailure
        If factorization fails twice or the residual check does not pass.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    y = np.asarray(observations, dtype=complex)
    if y.ndim != 1 or y.shape[0] != len(samples.times):
        raise DimensionMismatch(
            f"{y.shape[0] if y.ndim else 1} observations for {len(samples.times)} nodes"
        )
    w = np.asarray(samples.weights, dtype=float)
    K = assemble_kernel_matrix(prior, samples)
    A = K + epsilon * np.eye(len(w))
    ybar = w * y
    zbar = _solve_hpd(A, ybar)
    resid = np.linalg.norm(A @ zbar - ybar)
    if not resid <= RESIDUAL_RTOL * np.linalg.norm(ybar):
        raise SolveFailure(f"residual {resid:.3g} exceeds {RESIDUAL_RTOL:g} * |ybar|")
    prov = {"s": len(w), "seed": int(samples.seed), "density": samples.density.params()}
    prov.update(samples.meta)
    return ReconModel(prior, np.array(samples.times, dtype=float), zbar * w, float(epsilon),
                      samples.density.T, prov)


def evaluate_batch(model: ReconModel, ts) -> np.ndarray:
    """``ytilde`` at each time in ``ts``; rows are computed independently."""
    ts = np.asarray(ts, dtype=float).ravel()
    out = np.empty(ts.shape, dtype=complex)
    z = model.coeffs
    for start in range(0, ts.size, EVAL_CHUNK):
        block = ts[start:start + EVAL_CHUNK]
        kmat = model.prior.kernel(model.nodes[None, :] - block[:, None])
        out[start:start + EVAL_CHUNK] = (kmat * z[None, :]).sum(axis=1)
    return out


def evaluate(model: ReconModel, t: float) -> complex:
    """``ytilde(t)``; ``t`` outside ``[0, T]`` is plain extrapolation."""
    return complex(evaluate_batch(model, [t])[0])
