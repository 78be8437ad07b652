"""Inference of probabilistic Boolean networks from steady-state expression
samples, plus Monte Carlo and exact steady-state analysis."""

from .cod import CodResult, compute_cod, predict, solve_perceptron
from .discretize import BinaryMatrix, ThresholdMethod, discretize, threshold
from .errors import PbnError
from .infer import PredictorBuffer, assemble_pbn, assign_probabilities, enumerate_predictors, infer_pbn
from .ingest import ExpressionMatrix, parse_expression_matrix, select_genes
from .oracle import build_transition_matrix, stationary_distribution, total_variation
from .pbn import PBN, Predictor, simulate, simulate_codes, step
from .ssd import StateHistogram, emit_histogram, gray_to_int, histogram, ks_two_half_test

__version__ = "0.1.0"
