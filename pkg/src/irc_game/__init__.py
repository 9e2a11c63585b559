"""Interference relay channel rates and power-allocation games."""
from .scenario import (BandChannel, DomainError, NodeLayout, Protocol, Scenario,
                       ScenarioError, TsParams, load_scenario, dump_scenario, validate)
from .rates import RatePair, rate_af, rate_df, rate_ef, rate_ts, saturating_gain
from .afgain import GainParams, GainSolution, gain_params, optimal_gain, sum_rate_gain
from .game import (BrOptions, PowerAllocation, best_response, concavity_certificate,
                   cournot, utilities, utility, verify_ne)
from .af_analytic import (BrCoefficients, basin_map, br_affine, br_coefficients,
                          enumerate_ne, interior_ne, stability)
from .leader import SweepSpec, best_leader_value, dominance_map, ef_cut, sweep
from .kernels import BACKEND

__version__ = "0.1.0"
