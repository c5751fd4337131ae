"""Strategic behaviors: collusion spreading, Sybil stake-splitting, last-voter play.

Each operation compares an honest baseline against the strategic variant
and reports the multiplicative gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import utility as util
from .errors import InvalidSpec, LengthMismatch
from .schemes import BallotProfile, SchemeSpec, tally, validate_ballot, vscore
from .stake import StakeDistribution, canonicalize


@dataclass(frozen=True)
class AttackReport:
    attack_kind: str
    baseline: tuple
    attacked: tuple
    gain: float
    narrative: dict


def _dist_from_stakes(stakes):
    width = len(str(len(stakes)))
    return [(f"v{i + 1:0{width}d}", float(s)) for i, s in enumerate(stakes)]


def collusion_gain(stakes, m: int, honest_plan, colluding_plan) -> AttackReport:
    """Compare two qv1 ballot plans for the same voters.

    Plans are lists of BallotProfile matched to stakes by position. Gain is
    the minimum, over proposals the honest plan supports, of the colluding
    vscore over the honest vscore: how much better the coordinated spread
    does on every targeted proposal.
    """
    scheme = SchemeSpec("qv1")
    if len(honest_plan) != len(stakes) or len(colluding_plan) != len(stakes):
        raise LengthMismatch(len(stakes), len(honest_plan), "ballot plan")
    for plan in (honest_plan, colluding_plan):
        for stake, ballot in zip(stakes, plan):
            validate_ballot(scheme, stake, ballot)
    honest = vscore(scheme, honest_plan, m)
    colluding = vscore(scheme, colluding_plan, m)
    targeted = honest > 0
    if not targeted.any():
        raise InvalidSpec("honest plan supports no proposal")
    gain = float(np.min(colluding[targeted] / honest[targeted]))
    return AttackReport(
        attack_kind="collusion",
        baseline=tuple(honest),
        attacked=tuple(colluding),
        gain=gain,
        narrative={
            "scheme": "qv1",
            "targeted_proposals": [int(i) for i in np.nonzero(targeted)[0]],
            "per_proposal_ratio": [
                float(c / h) if h > 0 else None
                for h, c in zip(honest, colluding)
            ],
        },
    )


def sybil_gain(scheme: SchemeSpec, stake: float, k: int) -> float:
    """Vote-mass multiplier from splitting one stake across k identities.

    Each identity holds stake/k and concentrates on a single proposal; the
    gain is k * f(g(stake/k)) / f(g(stake)). Linear voting is immune
    (gain 1); every square-root family gains sqrt(k). Note the arithmetic
    yields sqrt(k) for qv3 as well, despite unsplit voting often being
    described as Sybil-proof; the computed value is reported as-is.
    """
    if k < 1:
        raise InvalidSpec(f"k must be >= 1, got {k}")
    if not stake > 0:
        raise InvalidSpec(f"stake must be > 0, got {stake}")
    if scheme.family == "linear":
        return 1.0
    whole = float(scheme.f(scheme.g(stake)))
    split = float(scheme.f(scheme.g(stake / k)))
    return k * split / whole


def last_voter_advantage(scheme_family: str, prior_ballots, prior_stakes,
                         last_voter_stake: float, profits,
                         aligned_fraction=None) -> AttackReport:
    """Quantify how much the final voter gains by optimizing against the board.

    Prior ballots are tallied under the scheme; their per-proposal vscore
    mass becomes the external total b_r of the last voter's utility
    problem, and a caller-supplied per-proposal fraction of it counts as
    aligned (default 1.0, which makes the objective flat). The gain is the
    optimized utility over a naive profit-proportional allocation.
    """
    if scheme_family not in ("qv1", "qv2"):
        raise InvalidSpec(f"last-voter analysis covers qv1/qv2, got {scheme_family!r}")
    m = len(profits)
    scheme = SchemeSpec(scheme_family)
    if prior_ballots:
        result = tally(scheme, prior_stakes, prior_ballots, m)
        b = np.array(result.vscore, dtype=float)
    else:
        b = np.zeros(m)
    frac = np.ones(m) if aligned_fraction is None else np.asarray(aligned_fraction,
                                                                  dtype=float)
    if frac.shape != (m,):
        raise LengthMismatch(m, frac.size, "aligned_fraction")
    if np.any(frac < 0) or np.any(frac > 1):
        raise InvalidSpec("aligned fractions must lie in [0, 1]")
    problem = util.UtilityProblem(profits=tuple(profits), aligned=tuple(frac * b),
                                  total=tuple(b), stake=last_voter_stake,
                                  scheme=scheme_family)

    pi = np.array(problem.profits)
    if pi.sum() <= 0:
        raise InvalidSpec("need at least one positive profit")
    if scheme_family == "qv1":
        naive = pi * math.sqrt(last_voter_stake / float(pi @ pi))
    else:
        naive = pi * (math.sqrt(last_voter_stake) / pi.sum())
    naive_u = util.utility(problem, naive)
    optimized = util.maximize(problem)
    if naive_u == 0.0:
        gain = 1.0 if optimized.utility == 0.0 else math.inf
    else:
        gain = optimized.utility / naive_u
    return AttackReport(
        attack_kind="last-voter",
        baseline=tuple(naive),
        attacked=optimized.allocation,
        gain=float(gain),
        narrative={
            "scheme": scheme_family,
            "external_total": [float(v) for v in b],
            "aligned_fraction": [float(v) for v in frac],
            "naive_utility": float(naive_u),
            "optimized_utility": float(optimized.utility),
            "degenerate_objective": optimized.degenerate,
        },
    )
