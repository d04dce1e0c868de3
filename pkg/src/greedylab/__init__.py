"""Weak greedy approximation: algorithms, convergence bounds and verification."""

from .banach import BanachGreedyTrace, r_dict, run_dga, solve_c
from .bounds import (BoundReport, TraceVerification, alpha_max_hilbert, banach_bound, e_m, hl1_bound, hl1_check,
                     product_bound_hilbert, dga_rate_shape, verify_trace)
from .dictionaries import (A1Certificate, Dictionary, SubspaceDictionary, a1_certify, load_dictionary,
                           make_explicit, save_dictionary, symmetrize, weak_sup)
from .hilbert import (GreedyTrace, IAConditionError, SelectionPolicy, WeaknessViolation, run_ia, run_rga,
                      run_twga, run_wga, run_wgafr, run_woga)
from .projections import (ProjectionTrace, SubspaceCollection, dist, project_onto, run_rp_schedule, run_wrpa,
                          wrpa_wga_equivalence)
from .spaces import SmoothnessMajorant, inner, lp_majorant, norm_lp, norming_functional
from .thresholding import BasisModel, greedy_permutation, necessity_counterexample, run_wtga
from .weakness import Subsequence, WeaknessSequence, diagnose, hardy_average, summability

__version__ = "0.1.0"
