"""Approximate bisimulation and Levy-Prokhorov distances on finite labelled Markov processes."""

from .core import (LMP, ModelError, ParseError, PseudoMetric, Relation, SubDistribution,
                   ValidationError, Violation, dirac, dump_lmp, dump_metric, eps_order, flatten,
                   parse_distribution, parse_lmp, parse_metric, pushforward, sub_order,
                   to_fraction, validate_pseudometric)
from .flow import FlowResult, TransportProblem, hall_feasible, max_transport, min_cost_transport
from .lpmetric import (LpBreakpointAnalysis, apply_delta_lp, ball, delta_lp_joint_infimum,
                       hom_sup_distance, lp_breakpoint_analysis, lp_distance, lp_feasible,
                       lp_feasible_bruteforce)
from .bisim import (EpsCoupling, SpanWitness, bisimilarity, build_span_witness,
                    coupling_violations, find_eps_coupling, greatest_eps_bisimulation,
                    greatest_eps_simulation, is_eps_bisimulation, is_eps_simulation,
                    is_eps_simulation_bruteforce, verify_eps_coupling, verify_span_lax)
from .metricfix import (BisimulationCache, CompareRow, DistanceBracket, FixpointReport,
                        apply_delta_k, bisim_distance_metric, check_fixpoint_lp, compare_table,
                        dstar_brackets, dstar_matrix, dstar_pair, eps_ball_relation,
                        iterate_delta_k, iterate_delta_lp, kantorovich_distance)

__version__ = "0.1.0"
