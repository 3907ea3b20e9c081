"""
qbm computes the exact decoherence of a free quantum Brownian particle
=====================================================================

A free particle coupled to a harmonic heat bath with spectral density
I(w) = zeta w**p exp(-w/omega_c) evolves, for any initial state, by a
linear phase-space map followed by a Gaussian convolution. qbm tabulates
every ingredient of that propagator and finds the time after which the
state is a mixture of pointer states.

How to use qbm in 3 simple steps
--------------------------------

Describe the bath

>>> from qbm import BathSpec, EvolutionContext, find_tc
>>> spec = BathSpec(p=1, zeta=1, beta=0.01, omega_c=20)

Solve for the Green's function, the moments and the pointer basis

>>> ctx = EvolutionContext.build(spec, horizon=10)

Ask for the localization time

>>> find_tc(ctx).t_c

The same pipeline is available from the command line as ``qbm tc``.
"""
import param

from .bath import (  # noqa
    BathSpec, KernelTable, damping_kernel, damping_laplace, imag_gamma_tilde,
    integrated_damping_kernel, kernel_table, noise_kernel, noise_kernel_table,
    real_gamma_tilde, spectral_density
)
from .config import options  # noqa
from .decoherence import (  # noqa
    EvolutionContext, HighTemperatureLimit, LocalizationReport, figure1_study, find_tc,
    pointer_weight, positivity_criterion, propagate, propagate_gaussian, tau_c_universal
)
from .exceptions import QBMError  # noqa
from .green import (  # noqa
    GreenTable, PropagatorMatrix, green_asymptote, green_ohmic, inverse_laplace_check,
    solve_green, v_matrix
)
from .moments import (  # noqa
    MomentSeries, PointerBasis, asymptotic_A, asymptotic_C, compute_moments,
    high_t_moments_ohmic, pointer_basis, stationary_momentum_variance
)
from .phase_space import (  # noqa
    GaussianState, GridSpec, WignerGrid, cat_wigner, gaussian_convolve, gaussian_wigner,
    husimi_pointer, negativity_volume, pointer_overlap, s_transform
)

__version__ = str(param.version.Version(fpath=__file__, archive_commit="$Format:%h$",
                                        reponame="qbm"))
