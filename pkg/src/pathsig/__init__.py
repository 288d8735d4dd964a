"""pathsig: path signatures, their lattice-based inversion, and the
simulation machinery to test both on Gaussian sample paths."""

from .frechet import FrechetConfig, frechet_variant, is_degenerate
from .gaussian import GaussianModel, covariance, sample_path, trial_model
from .lattice import CubeLattice, VisitRecord, locate, visit_sequence
from .one_forms import (BumpOneForm, LinearFunctional, Monomial, OneForm,
                        PolynomialOneForm, bump_one_form, extended_signature,
                        mollifier, polynomial_functional)
from .paths import (PiecewiseLinearPath, Reparametrization, concat_paths,
                    from_points, path_signature, reparametrize, reverse_path)
from .reconstruct import (AmbiguousRecovery, PathWordEvaluator,
                          ReconstructionConfig, ReconstructionResult,
                          SearchBudgetExceeded, convergence_study,
                          polygonal_path, reconstruct_path, recover_word,
                          word_extended_signature)
from .tensor import TensorSeries, concat, segment_signature, shuffle, unit_series

__version__ = "0.1.0"

__all__ = [
    "AmbiguousRecovery", "BumpOneForm", "CubeLattice", "FrechetConfig",
    "GaussianModel", "LinearFunctional", "Monomial", "OneForm",
    "PathWordEvaluator", "PiecewiseLinearPath", "PolynomialOneForm",
    "ReconstructionConfig", "ReconstructionResult", "Reparametrization",
    "SearchBudgetExceeded", "TensorSeries", "VisitRecord", "bump_one_form",
    "concat", "concat_paths", "convergence_study", "covariance",
    "extended_signature", "frechet_variant", "from_points", "is_degenerate",
    "locate", "mollifier", "path_signature", "polygonal_path",
    "polynomial_functional", "reconstruct_path", "recover_word",
    "reparametrize", "reverse_path", "sample_path", "segment_signature",
    "shuffle", "trial_model", "unit_series", "visit_sequence",
    "word_extended_signature",
]
