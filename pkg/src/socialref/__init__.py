"""Network games with social reference points.

Equilibrium consumption on weighted comparison networks, reservation wages
in a search model with peer references, portfolio choice and labour-market
sorting, each with executable checks of its comparative statics.
"""

__version__ = "0.1.0"

from .exceptions import (BoundViolationError, ConvergenceError, ExistenceError,
                         InfeasibleModelError, ParameterError, RankDeficientError, SocialRefError)
from .game import EquilibriumParams, EquilibriumResult
from .labor import LaborEconomy, SortingModel, check_pairwise_stability, solve_sorting
from .linear_game import solve_linear, stochastic_dominance_check
from .mccall import (McCallProblem, ReservationWage, reservation_wage_endogenous,
                     reservation_wage_exogenous, value_iteration_oracle)
from .network import (BonacichCentrality, ReferenceProfile, WeightedNetwork, bonacich,
                      erdos_renyi_row_normalized, uncorrelated_centrality)
from .nonlinear_game import ConsumptionGame, solve_nonlinear
from .ols import OLSRegression, ols
from .portfolio import PortfolioAllocation, PortfolioProblem, lambda_closed_form
from .simulation import SimulationConfig, run_simulation
from .utility import make_utility

__all__ = [
    "BonacichCentrality", "BoundViolationError", "ConsumptionGame", "ConvergenceError",
    "EquilibriumParams", "EquilibriumResult", "ExistenceError", "InfeasibleModelError",
    "LaborEconomy", "McCallProblem", "OLSRegression", "ParameterError", "PortfolioAllocation",
    "PortfolioProblem", "RankDeficientError", "ReferenceProfile", "ReservationWage",
    "SimulationConfig", "SocialRefError", "SortingModel", "WeightedNetwork", "bonacich",
    "check_pairwise_stability", "erdos_renyi_row_normalized", "lambda_closed_form", "make_utility",
    "ols", "reservation_wage_endogenous", "reservation_wage_exogenous", "run_simulation",
    "solve_linear", "solve_nonlinear", "solve_sorting", "stochastic_dominance_check",
    "uncorrelated_centrality", "value_iteration_oracle",
]
