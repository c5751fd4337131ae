"""Voting-scheme engine and decentralization analyzer.

Implements linear, quadratic (three variants) and gamma-power voting
schemes, the Gini/Nakamoto decentralization metrics, the whale-capping
gamma search, constrained utility maximizers for strategic voters, and
analyses of collusion, Sybil and last-voter behaviors.
"""

from .attacks import AttackReport, collusion_gain, last_voter_advantage, sybil_gain
from .metrics import (
    DecentralizationReport,
    eta,
    eta_threshold,
    gini,
    gini_from_lorenz,
    lorenz_points,
    nakamoto,
    nakamoto_normalized,
    report,
    rvr_split,
    rvr_unsplit,
)
from .schemes import (
    BallotProfile,
    SchemeSpec,
    TallyResult,
    score,
    tally,
    validate_ballot,
    voting_credit,
    vscore,
)
from .stake import (
    DistributionSpec,
    StakeDistribution,
    canonicalize,
    generate,
    normalize,
)
from .transform import (
    GammaSearchResult,
    apply_gamma,
    gamma_search,
    top_share,
    top_share_derivative,
    verify_transform_properties,
)
from .utility import (
    AllocationSolution,
    UtilityProblem,
    brute_force_oracle,
    kkt_residual,
    maximize,
    maximize_qv1,
    maximize_qv2,
    success_probability,
)

__version__ = "0.1.0"
