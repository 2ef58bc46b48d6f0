"""Generative model of how a designer picks design changes.

The simulated designer is noisily rational with a subjective model of the
task. A choice happens in three phases, each a Boltzmann-rational decision
over limited-horizon action values Q:

1. select: pick a candidate change c among all legal non-NoOp changes with
   probability proportional to exp(beta_select * Q(c));
2. switch: if a recommendation r was shown and differs from c, switch to it
   with probability sigma(beta_switch * (Q(r) - Q(c)));
3. stop: keep the surviving change d with probability
   sigma(beta_stop * (Q(d) - Q(NoOp))), otherwise do nothing.

Q values come from planning a few subjective steps ahead (the designer
imagines insertions by the largest-angle rule and removals that keep the
order). The same model yields exact choice probabilities (for inference)
and samples (for simulation); the unassisted designer is the identical model
with the recommendation absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .city import City
from .core import DesignChange, DesignProcess, IllegalChangeError


@dataclass(frozen=True)
class UserModelConfig:
    beam_width: int = 10
    horizon_max: int = 2
    #: temperatures at or above this take the exact argmax path
    argmax_beta: float = 1e6

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.horizon_max < 0:
            raise ValueError("horizon_max must be >= 0")


@dataclass(frozen=True)
class UserModelParams:
    """Bounded-rationality parameters of one hypothetical designer."""

    beta_select: float
    beta_switch: float
    beta_stop: float
    horizon: int

    def __post_init__(self):
        for name in ("beta_select", "beta_switch", "beta_stop"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and > 0")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")


@dataclass(frozen=True)
class UserParamPrior:
    """Hypothesis ranges for the bounded-rationality parameters."""

    beta_range: tuple[float, float] = (0.5, 50.0)
    horizon_max: int = 2

    def sample(self, rng: np.random.Generator) -> UserModelParams:
        lo, hi = np.log(self.beta_range[0]), np.log(self.beta_range[1])
        betas = np.exp(rng.uniform(lo, hi, size=3))
        horizon = int(rng.integers(0, self.horizon_max + 1))
        return UserModelParams(float(betas[0]), float(betas[1]), float(betas[2]), horizon)

    def jitter(self, params: UserModelParams, scale: float, rng: np.random.Generator) -> UserModelParams:
        """Rejuvenation noise on the temperatures (log space); horizon kept."""
        lo, hi = np.log(self.beta_range[0]), np.log(self.beta_range[1])

        def bump(v):
            return float(np.exp(np.clip(np.log(v) + rng.normal(0.0, scale * (hi - lo)), lo, hi)))

        return UserModelParams(
            bump(params.beta_select), bump(params.beta_switch), bump(params.beta_stop), params.horizon
        )


@dataclass(frozen=True)
class ChoiceObservation:
    """One observed decision: the state, what was recommended (if anything),
    and what the designer actually did."""

    state_before: object
    recommendation: DesignChange | None
    chosen: DesignChange


def subjective_insert(tour: Sequence[int], new_poi: int, city: City, closed: bool = True) -> tuple[int, ...]:
    """Insert a POI where it forms the largest angle with its prospective
    neighbors (the designer's mental routing shortcut).

    Slots sit between consecutive tour positions, including the wrap-around
    gap on closed tours and the two end extensions on open ones; ties break
    to the lowest slot. Tours of length 0 or 1 append trivially.
    """
    tour = tuple(tour)
    if new_poi in tour:
        raise ValueError(f"POI {new_poi} already in tour")
    arr = city.arrays()
    rows = np.array([city.row_of(p) for p in tour], dtype=np.int64)
    slot, _ = kernels.max_angle_slot(
        rows, len(rows), arr.xs, arr.ys, arr.dist, city.row_of(new_poi), closed
    )
    return tour[:slot] + (new_poi,) + tour[slot:]


def lookahead_value(
    process: DesignProcess,
    state,
    change: DesignChange,
    utility_params,
    params: UserModelParams,
    config: UserModelConfig | None = None,
) -> float:
    """Q(state, change): apply the change in the designer's subjective model,
    then the best utility reachable within `params.horizon` further
    subjective steps."""
    config = config or UserModelConfig()
    if change not in process.legal_changes(state):
        raise IllegalChangeError(f"{change.describe()} is not legal here")
    q = process.q_matrix(state, [change], [utility_params], [params.horizon], config.beam_width)
    return float(q[0, 0])


# -- exact choice probabilities ---------------------------------------------


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _log_sum_rows(logs: np.ndarray) -> np.ndarray:
    """Row-wise logsumexp that maps all-(-inf) rows to -inf without NaNs."""
    m = logs.max(axis=1)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return np.where(
            np.isfinite(m),
            safe + np.log(np.exp(logs - safe[:, None]).sum(axis=1)),
            -np.inf,
        )


class PhaseScratch:
    """Recommendation-independent pieces of the three-phase marginal for one
    (state, hypothesis batch): phase-1 log choice probabilities and phase-3
    keep/drop log odds. Candidate recommendations only change phase 2, so a
    planner scoring many candidates builds this once."""

    __slots__ = ("Qn", "lp1", "lkeep", "ldrop", "eff_sw", "hot_sw_rows")

    def __init__(
        self,
        Q: np.ndarray,
        beta_select: np.ndarray,
        beta_switch: np.ndarray,
        beta_stop: np.ndarray,
        argmax_beta: float,
    ):
        nn = Q.shape[1] - 1
        Qn = Q[:, :nn]
        q_stop = Q[:, nn:]
        self.Qn = Qn

        hot_sel = beta_select >= argmax_beta
        eff_sel = np.where(hot_sel, 0.0, beta_select)
        lp1 = _log_softmax(eff_sel[:, None] * Qn)
        for row in np.flatnonzero(hot_sel):
            lp1[row] = -np.inf
            lp1[row, int(np.argmax(Qn[row]))] = 0.0
        self.lp1 = lp1

        hot_sw = beta_switch >= argmax_beta
        self.eff_sw = np.where(hot_sw, 0.0, beta_switch)[:, None]
        self.hot_sw_rows = np.flatnonzero(hot_sw)

        hot_st = beta_stop >= argmax_beta
        eff_st = np.where(hot_st, 0.0, beta_stop)[:, None]
        lkeep = _log_sigmoid(eff_st * (Qn - q_stop))
        ldrop = _log_sigmoid(eff_st * (q_stop - Qn))
        if hot_st.any():
            rows = np.flatnonzero(hot_st)
            keep = Qn[rows] >= q_stop[rows]
            lkeep[rows] = np.where(keep, 0.0, -np.inf)
            ldrop[rows] = np.where(keep, -np.inf, 0.0)
        self.lkeep = lkeep
        self.ldrop = ldrop

    def log_marginal(self, rec_idx: int | None) -> np.ndarray:
        """(P, A) log probabilities with the NoOp column last."""
        P, nn = self.Qn.shape
        out = np.full((P, nn + 1), -np.inf)
        if rec_idx is None:
            lreach = self.lp1
        else:
            q_rec = self.Qn[:, rec_idx : rec_idx + 1]
            lswitch = _log_sigmoid(self.eff_sw * (q_rec - self.Qn))
            lstay = _log_sigmoid(self.eff_sw * (self.Qn - q_rec))
            if len(self.hot_sw_rows):
                rows = self.hot_sw_rows
                better = self.Qn[rows] < q_rec[rows]
                lswitch[rows] = np.where(better, 0.0, -np.inf)
                lstay[rows] = np.where(better, -np.inf, 0.0)
            switched = self.lp1 + lswitch
            switched[:, rec_idx] = self.lp1[:, rec_idx]  # own choice: phase 2 skipped
            lreach = self.lp1 + lstay
            lreach[:, rec_idx] = _log_sum_rows(switched)
        out[:, :nn] = lreach + self.lkeep
        out[:, nn] = _log_sum_rows(lreach + self.ldrop)
        return out


def log_marginal_matrix(
    Q: np.ndarray,
    rec_idx: int | None,
    beta_select: np.ndarray,
    beta_switch: np.ndarray,
    beta_stop: np.ndarray,
    argmax_beta: float = 1e6,
) -> np.ndarray:
    """Log choice probabilities of the three-phase process, marginalized in
    closed form over the latent phase outcomes.

    Q is (P, A) with the NoOp column LAST; rec_idx indexes the recommended
    action among the non-NoOp columns, None when nothing was recommended.
    Rows are independent hypotheses. Temperatures >= argmax_beta use exact
    argmax comparisons (ties: phase 1 takes the first maximum, phases 2 and 3
    keep the incumbent change).
    """
    P, A = Q.shape
    if A == 1:  # nothing but NoOp
        return np.zeros((P, 1))
    return PhaseScratch(Q, beta_select, beta_switch, beta_stop, argmax_beta).log_marginal(rec_idx)


def _log_distribution(
    process: DesignProcess,
    state,
    recommendation: DesignChange | None,
    utility_params,
    params: UserModelParams,
    config: UserModelConfig,
) -> tuple[list[DesignChange], np.ndarray]:
    actions = process.legal_changes(state)
    assert actions[-1].is_noop
    rec_idx = None
    if recommendation is not None and not recommendation.is_noop:
        try:
            rec_idx = actions.index(recommendation)
        except ValueError:
            raise IllegalChangeError(
                f"recommendation {recommendation.describe()} is not legal here"
            ) from None
    if len(actions) == 1:  # nothing but NoOp: phase 1 is skipped entirely
        return actions, np.zeros(1)
    Q = process.q_matrix(
        state, actions, [utility_params], [params.horizon], config.beam_width
    )
    logm = log_marginal_matrix(
        Q,
        rec_idx,
        np.array([params.beta_select]),
        np.array([params.beta_switch]),
        np.array([params.beta_stop]),
        config.argmax_beta,
    )
    return actions, logm[0]


def choice_distribution(
    process: DesignProcess,
    state,
    recommendation: DesignChange | None,
    utility_params,
    params: UserModelParams,
    config: UserModelConfig | None = None,
) -> dict[DesignChange, float]:
    """Exact marginal distribution of the designer's final action."""
    config = config or UserModelConfig()
    actions, logm = _log_distribution(
        process, state, recommendation, utility_params, params, config
    )
    return {a: float(np.exp(lm)) for a, lm in zip(actions, logm)}


def sample_choice(
    process: DesignProcess,
    state,
    recommendation: DesignChange | None,
    utility_params,
    params: UserModelParams,
    rng: np.random.Generator,
    config: UserModelConfig | None = None,
) -> DesignChange:
    """Draw one action from the choice distribution (seeded rng, reproducible)."""
    config = config or UserModelConfig()
    actions, logm = _log_distribution(
        process, state, recommendation, utility_params, params, config
    )
    probs = np.exp(logm)
    return actions[int(rng.choice(len(actions), p=probs / probs.sum()))]


def log_likelihood(
    process: DesignProcess,
    observation: ChoiceObservation,
    utility_params,
    params: UserModelParams,
    config: UserModelConfig | None = None,
) -> float:
    """Log probability the model assigns to the observed action."""
    config = config or UserModelConfig()
    actions, logm = _log_distribution(
        process,
        observation.state_before,
        observation.recommendation,
        utility_params,
        params,
        config,
    )
    try:
        idx = actions.index(observation.chosen)
    except ValueError:
        raise IllegalChangeError(
            f"observed action {observation.chosen.describe()} is not legal in its state"
        ) from None
    return float(logm[idx])
