"""Period function of separable planar Hamiltonian centers.

Computes ``T(E)`` for ``H = F(x) + G(y)`` by several independent routes,
evaluates the sign function ``M(x, y)`` that controls ``dT/dE``, issues
sampled sign certificates, and classifies the quartic family
``F = x^2/2 + a x^3/3 + b x^4/4``, ``G = y^2/2 + c y^4/4``.
"""

from .criterion import (CertifiedEnergy, SignCertificate, chicone_N, chicone_interval,
                        criterion_M, max_certified_energy, sign_certificate)
from .errors import *  # noqa: F401,F403
from .functions import (CoshWell, CosineWell, Polynomial, PowerWall, RelativisticKinetic,
                        SmoothFunction, TranslatedSum, function_from_spec)
from .gallery import builtin, ohp_build, ohp_x0, sinh_certified_bound
from .hamiltonian import (SeparableHamiltonian, annulus_energy_bound, turning_points,
                          validate_center)
from .period import (locate_period_extremum, period, period_derivative, period_raw,
                     period_theta, return_time_oracle, sample_period_curve)
from .polyfamily import (FamilyParams, NormalizationInput, classify, normalize, sigma_root,
                         tangency, thresholds)

__version__ = "0.1.0"
