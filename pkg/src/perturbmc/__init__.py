"""Series expansions, pole orders and comparison checks for singularly perturbed Markov chains."""
__version__ = "0.1.0"

from .errors import (AssumptionViolation, ModelError, NullityNotOne, PerturbMCError, SingularBlock,
                     SolverError)
from .scrn_model import (ChromatinParams, ReactionNetwork, StateSpace, build_chromatin_model,
                         enumerate_states, format_model, load_model, parse_model, propensity)
from .generator import (PerturbedGenerator, assemble_generator, block_decompose, classify_states,
                        verify_assumptions)
from .stationary_expansion import (higher_order, partial_balance_check, reduced_generator,
                                   stationary_exact, zeroth_and_first_order, zeroth_via_transient)
from .pole_order import edge_orders, pole_orders, stationary_orders
from .mfpt import birth_death_mfpt, mean_return_time, mfpt_exact, mfpt_leading
from .comparison import ConeSpec, check_comparison, increasing_set_check, monotone_sweep
from .oracle import SimConfig, hitting_time_sample, slope_fit, ssa_run
