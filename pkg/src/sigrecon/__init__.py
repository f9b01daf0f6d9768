"""Signal reconstruction from few samples under Fourier priors.

The public surface is re-exported here; see the submodules for details.
"""
from .density import (
    SampleSet,
    SamplingDensity,
    bandlimited_density,
    draw_samples,
    recommended_sample_count,
    uniform_density,
    universal_density,
)
from .errors import *  # noqa: F401,F403
from .measure import (
    Bandlimited,
    CauchyLorentz,
    Gaussian,
    GaussianMixture,
    Multiband,
    NumericDensity,
    Prior,
    Sparse,
    kernel_quadrature,
    kernel_value,
    prior_from_dict,
    prior_from_json,
    validate,
)
from .operator_lab import (
    LeverageProfile,
    SpectrumGrid,
    discretize,
    eig_count,
    hard_instance,
    leverage_profile,
    stat_dim,
)
from .recon import ReconModel, assemble_kernel_matrix, evaluate, evaluate_batch, fit
from .signals import (
    NoNoise,
    SeededGridNoise,
    SinusoidNoise,
    SyntheticSignal,
    TableSignal,
    adversarial_ws_instance,
    mean_sq_error,
    query,
    synth_signal,
    ws_truncated,
)

__version__ = "0.1.0"
