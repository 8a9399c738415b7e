"""gecmv: mosaic quasi-periodic unitary five-diagonal operators.

Library for a family of generalized extended CMV matrices built from split-step
quantum walks with a mosaic quasi-periodic coin: operator assembly, gauge
transformations, transfer/Szego cocycles, Lyapunov exponents with closed-form
predictions, unit-circle spectra, Green's functions, and mobility-edge scans.
"""

from .analysis import (EdgeScanRow, decay_rate_fit, eps_uniform_measure,
                       fractal_dimension, mobility_edge_scan, write_scan_csv)
from .cocycle import (CocycleSpec, OrbitProduct, conjugation_defect, epsilon0,
                      eval_map, mz_matrix, orbit_log_norm, szego_step,
                      szegopp_map, transfer_a, transfer_from_source)
from .errors import (AsymmetricWindow, DegenerateCoupling, DuplicateNodes,
                     FloorDominated, GecmvError, MisalignedWindow,
                     NearEigenvalue, NoMobilityEdge, NonUnimodularInput,
                     NormConditionViolated, NotAnEigenvalue, NumericalError,
                     PeakTooCloseToBoundary, RationalInput,
                     RecoveryIllConditioned, RootCountMismatch,
                     ShootingUnstable, SingularRho, StripExceeded,
                     ValidationError, WindowTooSmall)
from .lyapunov import (ArcDecomposition, Classification, LyapunovEstimate,
                       acceleration, classify, f_value, gamma_tilde,
                       jensen_integral, le_closed_form, le_estimate,
                       spectral_arcs)
from .model import (GOLDEN, Coin, ConstantSource, ConvergentList,
                    ExplicitSource, FunctionSource, MosaicParams, MosaicSource,
                    PhasedSource, RealifiedSource, TwinSource, VerblunskyPair,
                    coin_at, convergents, diophantine_check, mobility_edge_t0,
                    mosaic_pair_at, resonance_scan, twin_pair_at)
from .operators import (BoundaryCondition, FiniteOperator, GaugeDiagonal,
                        IndexWindow, SGECMVSource, assemble_finite,
                        assemble_sgecmv, b_tridiagonal, dump_matrix,
                        gauge_diagonal, lm_truncations, recover_coefficients,
                        reflect, reflection_symmetry_check, sgecmv_gauge,
                        theta_block, walk_matrix)
from .spectral import (CharPolyValue, EigenfunctionProfile, RegularityResult,
                       SpectrumResult, char_poly, char_poly_evenness,
                       eigenvector_shooting, greens_function, regularity_test,
                       rho_product_rate, spectrum_dense, truncation_spectrum)

__version__ = "0.1.0"
