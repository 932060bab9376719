"""
Spectral oracle for residue-lab
Independent numerical realization of symbols as banded Fourier-basis matrices
"""

__version__ = "1.0.0"

from .spectral_operator import (OracleError, RadiusTooSmall, TailNotRational, SpectralOperator,
                                quantize, law_operator, commutator_with_law, ad_operator, product_of)
from .zeta_trace import ZetaGerm, zeta_trace_germ, weighted_trace, OracleTraceProvider
from .heat_kernel import (HeatParams, IdentityCheck, heat_trace, simplex_heat_kernel, jlo_value,
                          duhamel_check, b_jlo_check, basicformula_check, family_jlo_check)
