"""Grid discretization of the time-limited kernel operator.

The operator ``(K z)(t) = (1/T) int_0^T k(t - s) z(s) ds`` is discretized with
the midpoint rule on ``t_i = (i - 1/2) T / n``, giving the Hermitian Toeplitz
matrix ``A[i, j] = k(t_i - t_j) / n`` whose trace is exactly 1.  From its
eigenvalues we get the statistical dimension, eigenvalue counts and the ridge
leverage profile, plus random signals built from the top eigenfunctions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from .errors import DegenerateSpectrum, DomainError, EigensolveFailure
from .measure import (
    Bandlimited,
    CauchyLorentz,
    Gaussian,
    Multiband,
    Prior,
    Sparse,
)
from .signals import SyntheticSignal

DEFAULT_GRID_N = 1024
HARD_FACTOR = 72.0


@dataclass(frozen=True)
class SpectrumGrid:
    prior: Prior
    T: float
    n: int
    grid_times: np.ndarray
    eigenvalues: np.ndarray  # descending, clamped at 0
    eigenvectors: np.ndarray | None  # columns match eigenvalues
    raw_min: float  # smallest eigenvalue before clamping

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))


def grid_times(T: float, n: int) -> np.ndarray:
    return (np.arange(1, n + 1) - 0.5) * T / n


def operator_matrix(prior: Prior, T: float, n: int) -> np.ndarray:
    """``A[i, j] = k(t_i - t_j) / n`` built from its first column and row."""
    lags = np.arange(n) * (T / n)
    col = prior.kernel(lags) / n
    row = prior.kernel(-lags) / n
    return linalg.toeplitz(col, row)


def discretize(prior: Prior, T: float, n: int = DEFAULT_GRID_N, vectors: bool = True) -> SpectrumGrid:
    """Eigendecomposition of the midpoint-rule operator matrix.

    With ``vectors=False`` only eigenvalues are computed and
    ``eigenvectors`` is ``None``.
    """
    if int(n) != n or n < 16:
        raise DomainError(f"grid size must be an integer >= 16, got {n}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    n = int(n)
    A = operator_matrix(prior, T, n)
    if not np.any(A.imag):
        A = A.real  # real symmetric solver is faster and gives the same spectrum
    try:
        if vectors:
            lam, U = linalg.eigh(A)
        else:
            lam, U = linalg.eigh(A, eigvals_only=True), None
    except (linalg.LinAlgError, ValueError) as exc:
        raise EigensolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigensolveFailure("non-finite eigenvalues")
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    if U is not None:
        U = U[:, order]
    return SpectrumGrid(prior, float(T), n, grid_times(T, n), np.maximum(lam, 0.0), U,
                        float(lam.min()))


def _eigs(spectrum) -> np.ndarray:
    lam = spectrum.eigenvalues if isinstance(spectrum, SpectrumGrid) else spectrum
    return np.maximum(np.asarray(lam, dtype=float), 0.0)


def stat_dim(spectrum, epsilon: float) -> float:
    """``sum(lambda / (lambda + eps))`` over clamped eigenvalues.

    ``spectrum`` may be a :class:`SpectrumGrid` or a bare eigenvalue array.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    lam = _eigs(spectrum)
    return float(np.sum(lam / (lam + epsilon)))


def eig_count(spectrum, epsilon: float) -> int:
    """Number of eigenvalues ``>= eps``; never exceeds twice the statistical dimension."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    lam = _eigs(spectrum)
    count = int(np.count_nonzero(lam >= epsilon))
    # each counted eigenvalue contributes at least 1/2 to the sum
    assert count <= 2.0 * stat_dim(lam, epsilon) + 1e-9
    return count


def stat_dim_checked(prior: Prior, T: float, epsilon: float, n: int = DEFAULT_GRID_N) -> dict:
    """Statistical dimension at grid sizes ``n`` and ``2n`` with their discrepancy."""
    s_n = stat_dim(discretize(prior, T, n, vectors=False), epsilon)
    s_2n = stat_dim(discretize(prior, T, 2 * n, vectors=False), epsilon)
    return {
        "stat_dim": s_n,
        "stat_dim_2n": s_2n,
        "rel_discrepancy": abs(s_2n - s_n) / max(abs(s_2n), 1e-300),
        "n": n,
    }


@dataclass(frozen=True)
class LeverageProfile:
    grid_times: np.ndarray
    tau_hat: np.ndarray
    epsilon: float
    T: float
    stat_dim: float

    def integral(self) -> float:
        return float(self.T / len(self.tau_hat) * np.sum(self.tau_hat))


def leverage_from_spectrum(spectrum: SpectrumGrid, epsilon: float) -> LeverageProfile:
    """``tau_hat_i = (n/T) [A (A + eps I)^{-1}]_{ii}`` via the eigen-expansion."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    lam = spectrum.eigenvalues
    filt = lam / (lam + epsilon)
    diag = (np.abs(spectrum.eigenvectors) ** 2) @ filt
    tau = diag * (spectrum.n / spectrum.T)
    return LeverageProfile(spectrum.grid_times, tau, float(epsilon), spectrum.T,
                           stat_dim(spectrum, epsilon))


def leverage_profile(prior: Prior, T: float, n: int, epsilon: float) -> LeverageProfile:
    return leverage_from_spectrum(discretize(prior, T, n), epsilon)


def hard_instance(spectrum: SpectrumGrid, epsilon: float, seed: int) -> SyntheticSignal:
    """Random combination of the top eigenfunctions, as an exactly evaluable signal.

    With ``m = eig_count(spectrum, 72 eps)`` and ``c_i ~ N(0, 1/m)``, the grid
    eigenvectors ``u_i`` (scaled by ``sqrt(n)`` to unit mean square) are
    extended off the grid by the Nystrom formula
    ``phi_i(t) = (1/(n lambda_i)) sum_j k(t_j - t) sqrt(n) conj(u_i[j])``,
    which is exact at the grid nodes.  The sum ``y = sum_i c_i phi_i`` is a
    kernel expansion with atoms at the grid times, so its prior energy is
    available in closed form and equals ``sum_i c_i**2 / lambda_i``.

    Raises
    ------
    DegenerateSpectrum
        If no eigenvalue reaches ``72 eps``.
    """
    m = eig_count(spectrum, HARD_FACTOR * epsilon)
    if m == 0:
        raise DegenerateSpectrum(
            f"no eigenvalue >= {HARD_FACTOR:g}*eps = {HARD_FACTOR * epsilon:.3g} "
            f"(largest is {spectrum.eigenvalues[0]:.3g})"
        )
    rng = np.random.default_rng(seed)
    c = rng.normal(0.0, 1.0 / math.sqrt(m), size=m)
    lam = spectrum.eigenvalues[:m]
    U = spectrum.eigenvectors[:, :m]
    n = spectrum.n
    # conj(U) diagonalizes A^T, which is the matrix the signal's atoms act through
    Uc = np.conj(U)
    beta = Uc @ (c / lam) / math.sqrt(n)
    meta = {"m": m, "c": c, "energy_estimate": float(np.sum(c * c / lam)),
            "grid_values": math.sqrt(n) * (Uc @ c), "seed": int(seed)}
    return SyntheticSignal(spectrum.prior, spectrum.grid_times.copy(), beta.astype(complex), meta)


# -- analytic upper bounds on the statistical dimension --------------------

def _bandlimited_bound(FT: float, epsilon: float) -> float:
    eps = min(epsilon, 1.0)
    q = math.ceil(16.0 * math.pi * math.e * FT + 2.0 * math.log(1.0 / eps) + 11.0)
    return 2.0 * math.sqrt(2.0) * q + 4.0


def analytic_stat_dim_bound(prior: Prior, T: float, epsilon: float) -> float | None:
    """Closed-form upper bound on the statistical dimension, or ``None``.

    Bandlimited priors use the mass of the bandlimited density.  A measure
    ``gamma * nu`` with ``nu`` a probability measure has
    ``s(gamma nu, eps) = s(nu, eps/gamma)``, so each band of a multiband prior
    (and the central interval of a Gaussian or Cauchy prior) is bounded as a
    bandlimited prior at ``eps/gamma``; the remaining tail of mass ``r``
    contributes at most ``r / eps`` since its trace is ``r``.
    """
    if isinstance(prior, Sparse):
        return float(len(prior.atoms))
    if isinstance(prior, Bandlimited):
        return _bandlimited_bound(prior.F * T, epsilon)
    if isinstance(prior, Multiband):
        total = prior.total_width
        return sum(_bandlimited_bound(w * T, epsilon * total / w) for _, w in prior.bands)
    if isinstance(prior, (Gaussian, CauchyLorentz)):
        if isinstance(prior, Gaussian):
            h = prior.F * math.sqrt(2.0 * math.log(1.0 / min(epsilon, 0.5)))
            tail = float(special.erfc(h / (prior.F * math.sqrt(2.0))))
            peak = 1.0 / (prior.F * math.sqrt(2.0 * math.pi))
        else:
            h = prior.F / math.sqrt(min(epsilon, 0.5))
            tail = 1.0 - 2.0 / math.pi * math.atan(h / prior.F)
            peak = 1.0 / (math.pi * prior.F)
        # the head density is dominated by peak * uniform on [-h, h]: gamma = 2 h peak
        gamma = 2.0 * h * peak
        return _bandlimited_bound(h * T, epsilon / gamma) + tail / epsilon
    return None


def alpha_for(prior: Prior, T: float, epsilon: float, source: str = "analytic-bound",
              beta: float = 256.0, n: int = DEFAULT_GRID_N, alpha: float | None = None) -> dict:
    """Pick ``alpha`` for the universal density and record where it came from."""
    if source == "explicit":
        if alpha is None:
            raise DomainError("alpha-source explicit needs an alpha value")
        return {"alpha": float(alpha), "alpha_source": "explicit"}
    bound = analytic_stat_dim_bound(prior, T, epsilon) if source == "analytic-bound" else None
    if bound is not None:
        return {"alpha": max(128.0, beta * bound), "alpha_source": "analytic-bound",
                "stat_dim_bound": bound, "beta": beta}
    if source not in ("analytic-bound", "numeric-statdim"):
        raise DomainError(f"unknown alpha source {source!r}")
    chk = stat_dim_checked(prior, T, epsilon, n)
    return {"alpha": max(128.0, beta * chk["stat_dim"]), "alpha_source": "numeric-statdim",
            "stat_dim_estimate": chk["stat_dim"], "stat_dim_2n": chk["stat_dim_2n"],
            "rel_discrepancy": chk["rel_discrepancy"], "grid_n": n, "beta": beta}
