"""Operators on l2(Z; C^m) as finite diagonal expansions, and spectral factorization
W = U* U with U and U^{-1} upper triangular and Wiener-summable."""

__version__ = "0.1.0"

from .diag_core import (Diagonal, IndexWindow, NSOperator, allclose, extend_edges,
                        get_entry, identity, max_abs_diff, restrict, shift,
                        shift_conjugate, zero)
from .algebra import (NormReport, add, adjoint, gram_diagonals, hilbert_schmidt_norm,
                      multiply, norms, phi_of, real_part, wiener_norm)
from .dense_oracle import (DenseTruncation, cholesky_upper, extract_diagonals,
                           min_eig_lower_bound, render, triangular_solve_upper)
from .zadeh import (ZadehEvaluation, lambda_conjugation_check, radial_limit_bound,
                    zadeh_eval, zadeh_multiplicativity_check)
from .factorization import (FactorizationReport, cayley_check, check_positive,
                            normalize_factor, spectral_factor, triangular_inverse,
                            verify_factorization)
