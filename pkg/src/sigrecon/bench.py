"""Error-versus-sample-count curves for the reconstruction methods."""
from __future__ import annotations

import math

import numpy as np

from .density import bandlimited_density, draw_samples, spawn_seeds, uniform_density, universal_density
from .measure import Bandlimited, Prior
from .recon import fit
from .signals import NoNoise, mean_sq_error, query, random_synthetic, ws_truncated

METHODS = ("universal", "uniform", "whittaker-shannon")


def ws_window(F: float, T: float, s: int) -> np.ndarray:
    """``s`` Nyquist-spaced times centred on ``T/2``."""
    h = 1.0 / (2.0 * F)
    return T / 2.0 + h * (np.arange(s) - (s - 1) / 2.0)


def run_trial(prior: Prior, signal, noise, T: float, epsilon: float, method: str, s: int,
              seed: int, alpha: float, n_quad: int = 2048) -> float:
    """Mean squared error on ``[0, T]`` of one reconstruction."""
    if method == "whittaker-shannon":
        times = ws_window(prior.F, T, s)
        vals = query(signal, noise, times)
        est = lambda t: ws_truncated(times, vals, t, F=prior.F)  # noqa: E731
    else:
        dens = universal_density(alpha, T) if method == "universal" else uniform_density(T)
        samples = draw_samples(dens, s, seed)
        model = fit(prior, samples, query(signal, noise, samples.times), epsilon)
        est = model
    return mean_sq_error(signal, est, T, n_quad).value


def bench_curves(prior: Prior, T: float, epsilon: float, sample_counts, trials: int, seed: int,
                 alpha: float, noise=None, n_atoms: int = 8, methods=None) -> list[dict]:
    """Median and quartiles of the error over ``trials`` unit-energy signals.

    Whittaker-Shannon runs only for bandlimited priors.
    """
    noise = noise or NoNoise()
    methods = list(methods or METHODS)
    if not isinstance(prior, Bandlimited) and "whittaker-shannon" in methods:
        methods.remove("whittaker-shannon")
    seeds = spawn_seeds(seed, trials)
    signals = [random_synthetic(prior, T, n_atoms, sd, real=prior.symmetric) for sd in seeds]
    rows = []
    for method in methods:
        for s in sample_counts:
            errs = [run_trial(prior, sig, noise, T, epsilon, method, int(s), sd, alpha)
                    for sig, sd in zip(signals, seeds)]
            q1, med, q3 = np.quantile(errs, [0.25, 0.5, 0.75])
            rows.append({"method": method, "s": int(s), "median_mse": float(med),
                         "q1_mse": float(q1), "q3_mse": float(q3)})
    return rows


def default_sample_counts(lo: int = 10, hi: int = 320) -> list[int]:
    k = int(math.log2(hi / lo))
    return [lo * 2**i for i in range(k + 1)]


def hard_instance_errors(spectrum, epsilon: float, s: int, seeds, density=None,
                         n_quad: int = 2048) -> list[dict]:
    """Reconstruct hard instances with ``s`` samples per seed.

    The default density is the bandlimited one for bandlimited priors and the
    universal one with ``alpha = 256 * stat_dim`` otherwise.  Each entry holds
    the error, the signal's prior energy and its mean square on the window.
    """
    from .operator_lab import hard_instance, stat_dim

    prior, T = spectrum.prior, spectrum.T
    dens = density
    if dens is None and isinstance(prior, Bandlimited):
        dens = bandlimited_density(prior.F, T, min(epsilon, 1.0))
    elif dens is None:
        dens = universal_density(max(128.0, 256.0 * stat_dim(spectrum, epsilon)), T)
    out = []
    for sd in seeds:
        sig = hard_instance(spectrum, epsilon, sd)
        samples = draw_samples(dens, s, sd)
        model = fit(prior, samples, sig(samples.times), epsilon)
        out.append({
            "mse": mean_sq_error(sig, model, T, n_quad).value,
            "energy": sig.meta["energy_estimate"],
            "norm_sq": mean_sq_error(sig, None, T, n_quad).value,
            "m": sig.meta["m"],
        })
    return out
