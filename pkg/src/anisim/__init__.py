"""Online SGD learning of single-index models from anisotropic Gaussian data.

Library layout:

- :mod:`anisim.hermite`     probabilists' Hermite algebra and quadrature
- :mod:`anisim.mc`          Monte-Carlo expectation oracle
- :mod:`anisim.covariance`  structured covariances and alignment statistics
- :mod:`anisim.sim_model`   the data generator y = f(<x, w*/||Q^(1/2)w*||>)
- :mod:`anisim.trainers`    the four online SGD variants and diagnostics
- :mod:`anisim.population`  deterministic drift, recursion, Gaussian integrals
- :mod:`anisim.csq`         correlational-query lower-bound construction
- :mod:`anisim.experiments` presets, runners, CSV output
- :mod:`anisim.validation`  machine-checkable acceptance suites
"""

from .covariance import AlignmentStats, CovarianceSpec, Dense, Diagonal, Identity, Spiked
from .hermite import HermiteCoeffs, hermite_coeffs_of, hermite_eval, information_exponent
from .mc import McEstimate, estimate, estimate_correlated
from .population import (
    escape_time_estimate,
    gauss_int1,
    gauss_int2,
    g2_magnitude,
    population_drift,
    population_recursion,
)
from .sim_model import (
    LinkFunction,
    SimInstance,
    check_assumption_coeff,
    generate_sample,
    hermite_link,
    make_instance,
    normalize_link,
    sign_link,
)
from .trainers import TrainerConfig, TrajectoryRecord, run_trajectory, theorem1_schedule

__version__ = "0.1.0"
