"""The cooperative assistant: posterior over designer hypotheses, planning.

The assistant never sees the designer's goal. It keeps a weighted particle
set over joint (utility, bounded-rationality) hypotheses, reweights it after
every observed choice with the generative user model's exact likelihood, and
plans its single what-if recommendation by expected true-utility gain (with
an optional information-gain bonus), forward-simulating how the modeled
designer reacts to each candidate.

All particle math runs in log space; results are independent of particle
evaluation order.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .core import DesignChange, DesignProcess, IllegalChangeError
from .user_model import (
    ChoiceObservation,
    PhaseScratch,
    UserModelConfig,
    UserModelParams,
    log_marginal_matrix,
)


@dataclass(frozen=True)
class AssistantConfig:
    n_particles: int = 256
    #: resample when ESS drops below this fraction of n_particles
    ess_fraction: float = 0.5
    info_gain_weight: float = 0.0
    #: per particle, how many of its best changes enter the candidate pool
    candidate_cap: int = 15
    resampling_enabled: bool = True
    #: rejuvenation noise after resampling, as a fraction of each prior range
    jitter_scale: float = 0.0
    model: UserModelConfig = field(default_factory=UserModelConfig)

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("n_particles must be >= 2")
        if not 0.0 < self.ess_fraction <= 1.0:
            raise ValueError("ess_fraction must lie in (0, 1]")
        if self.info_gain_weight < 0:
            raise ValueError("info_gain_weight must be >= 0")
        if self.candidate_cap < 1:
            raise ValueError("candidate_cap must be >= 1")
        if self.jitter_scale < 0:
            raise ValueError("jitter_scale must be >= 0")


@dataclass(frozen=True)
class Particle:
    utility: Any
    user: UserModelParams
    log_weight: float


@dataclass(frozen=True)
class JointParamPrior:
    """Assistant's hypothesis set: independent priors over utility and
    bounded-rationality parameters."""

    utility_prior: Any
    user_prior: Any

    def sample(self, rng: np.random.Generator) -> tuple[Any, UserModelParams]:
        return self.utility_prior.sample(rng), self.user_prior.sample(rng)

    def jitter(self, utility, user, scale: float, rng: np.random.Generator):
        return (
            self.utility_prior.jitter(utility, scale, rng),
            self.user_prior.jitter(user, scale, rng),
        )


@dataclass
class ParticleSet:
    particles: list[Particle]
    rng: np.random.Generator
    prior: JointParamPrior | None = None

    def __len__(self) -> int:
        return len(self.particles)

    @property
    def log_weights(self) -> np.ndarray:
        return np.array([p.log_weight for p in self.particles])

    @property
    def weights(self) -> np.ndarray:
        lw = self.log_weights
        lw = lw - lw.max()
        w = np.exp(lw)
        return w / w.sum()

    def entropy(self) -> float:
        w = self.weights
        nz = w[w > 0]
        return float(-(nz * np.log(nz)).sum())

    def ess(self) -> float:
        w = self.weights
        return float(1.0 / np.square(w).sum())

    def top_particle(self) -> Particle:
        return max(self.particles, key=lambda p: p.log_weight)


def init_posterior(
    prior: JointParamPrior, config: AssistantConfig, seed
) -> ParticleSet:
    """Draw the initial hypothesis set i.i.d. from the prior, uniform weights."""
    rng = np.random.default_rng(seed)
    n = config.n_particles
    lw = -float(np.log(n))
    particles = []
    for _ in range(n):
        utility, user = prior.sample(rng)
        particles.append(Particle(utility, user, lw))
    return ParticleSet(particles, rng, prior)


def _stacked_arrays(ps: ParticleSet, process: DesignProcess):
    thetas = np.stack([process.utility_weights(p.utility) for p in ps.particles])
    horizons = np.array([p.user.horizon for p in ps.particles])
    b_sel = np.array([p.user.beta_select for p in ps.particles])
    b_sw = np.array([p.user.beta_switch for p in ps.particles])
    b_stop = np.array([p.user.beta_stop for p in ps.particles])
    return thetas, horizons, b_sel, b_sw, b_stop


def _posterior_q(ps: ParticleSet, state, actions, process: DesignProcess, model: UserModelConfig):
    return process.q_matrix(
        state,
        actions,
        [p.utility for p in ps.particles],
        [p.user.horizon for p in ps.particles],
        model.beam_width,
    )


def _rec_index(actions: list[DesignChange], rec: DesignChange | None) -> int | None:
    if rec is None or rec.is_noop:
        return None
    try:
        return actions.index(rec)
    except ValueError:
        raise IllegalChangeError(f"recommendation {rec.describe()} is not legal here") from None


def update_posterior(
    ps: ParticleSet,
    obs: ChoiceObservation,
    process: DesignProcess,
    config: AssistantConfig,
) -> ParticleSet:
    """Bayes reweighting by the observation's likelihood under each particle,
    then systematic resampling if the effective sample size collapses.

    Returns a new set; the input set (including its rng state) is untouched.
    """
    state = obs.state_before
    actions = process.legal_changes(state)
    try:
        chosen_idx = actions.index(obs.chosen)
    except ValueError:
        raise IllegalChangeError(
            f"observed action {obs.chosen.describe()} is not legal in its state"
        ) from None
    rec_idx = _rec_index(actions, obs.recommendation)

    if len(actions) == 1:
        loglik = np.zeros(len(ps))
    else:
        _, _, b_sel, b_sw, b_stop = _stacked_arrays(ps, process)
        Q = _posterior_q(ps, state, actions, process, config.model)
        logm = log_marginal_matrix(Q, rec_idx, b_sel, b_sw, b_stop, config.model.argmax_beta)
        loglik = logm[:, chosen_idx]

    lw = ps.log_weights + loglik
    m = lw.max()
    lw = lw - (m + np.log(np.exp(lw - m).sum()))
    rng = copy.deepcopy(ps.rng)
    particles = [replace(p, log_weight=float(w)) for p, w in zip(ps.particles, lw)]
    new_ps = ParticleSet(particles, rng, ps.prior)

    n = len(new_ps)
    if config.resampling_enabled and new_ps.ess() < config.ess_fraction * n:
        w = new_ps.weights
        u = rng.uniform()
        points = (np.arange(n) + u) / n
        cum = np.cumsum(w)
        idx = np.minimum(np.searchsorted(cum, points, side="left"), n - 1)
        lw0 = -float(np.log(n))
        resampled = []
        for i in idx:
            p = new_ps.particles[int(i)]
            if config.jitter_scale > 0 and ps.prior is not None:
                utility, user = ps.prior.jitter(p.utility, p.user, config.jitter_scale, rng)
                resampled.append(Particle(utility, user, lw0))
            else:
                resampled.append(replace(p, log_weight=lw0))
        new_ps = ParticleSet(resampled, rng, ps.prior)
    return new_ps


# -- planning -----------------------------------------------------------------


def _objective_utility_deltas(
    ps: ParticleSet, state, actions, process: DesignProcess
) -> np.ndarray:
    """(particles x actions) true-utility change of each action under
    objective routing, per particle."""
    base = process.features(state)
    dphi = np.stack([process.features(process.apply(state, a)) for a in actions]) - base
    thetas = np.stack([process.utility_weights(p.utility) for p in ps.particles])
    return thetas @ dphi.T


def _step_gain_from(M: np.ndarray, dU: np.ndarray, w: np.ndarray) -> float:
    return float(w @ (M * dU).sum(axis=1))


def _entropy_of(w: np.ndarray) -> float:
    nz = w[w > 0]
    return float(-(nz * np.log(nz)).sum())


def _info_gain_from(M: np.ndarray, w: np.ndarray) -> float:
    """Mutual information between the particle index and the predicted action:
    prior weight entropy minus expected posterior weight entropy."""
    WA = w[:, None] * M  # joint over (particle, action)
    mass = WA.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        joint_term = np.where(WA > 0, WA * np.log(WA), 0.0).sum()
        mass_term = np.where(mass > 0, mass * np.log(mass), 0.0).sum()
    return _entropy_of(w) - (mass_term - joint_term)


def _scratch_for(ps: ParticleSet, state, actions, process, model: UserModelConfig) -> PhaseScratch:
    _, _, b_sel, b_sw, b_stop = _stacked_arrays(ps, process)
    Q = _posterior_q(ps, state, actions, process, model)
    return PhaseScratch(Q, b_sel, b_sw, b_stop, model.argmax_beta)


def expected_step_gain(
    ps: ParticleSet,
    state,
    candidate_rec: DesignChange | None,
    process: DesignProcess,
    config: AssistantConfig,
) -> float:
    """Posterior-expected one-step true-utility gain if `candidate_rec` is
    shown: sum over particles and designer actions of weight x P(action) x
    utility delta, with the delta taken under objective routing."""
    actions = process.legal_changes(state)
    if len(actions) == 1:
        return 0.0
    rec_idx = _rec_index(actions, candidate_rec)
    scratch = _scratch_for(ps, state, actions, process, config.model)
    M = np.exp(scratch.log_marginal(rec_idx))
    dU = _objective_utility_deltas(ps, state, actions, process)
    return _step_gain_from(M, dU, ps.weights)


def expected_info_gain(
    ps: ParticleSet,
    state,
    candidate_rec: DesignChange | None,
    process: DesignProcess,
    config: AssistantConfig,
) -> float:
    """Expected drop in particle-weight entropy from observing the designer's
    next action if `candidate_rec` is shown; never negative for exact
    reweighting on the particle support."""
    actions = process.legal_changes(state)
    if len(actions) == 1:
        return 0.0
    rec_idx = _rec_index(actions, candidate_rec)
    scratch = _scratch_for(ps, state, actions, process, config.model)
    M = np.exp(scratch.log_marginal(rec_idx))
    return _info_gain_from(M, ps.weights)


def plan_recommendation(
    ps: ParticleSet,
    state,
    process: DesignProcess,
    config: AssistantConfig,
) -> DesignChange | None:
    """The next what-if recommendation: the non-NoOp change maximizing
    expected step gain (plus the optional information bonus) over a candidate
    pool of each particle's individually best changes.

    Ties break to the lowest POI id with adds before removals. Returns None
    when no non-NoOp change is legal.
    """
    actions = process.legal_changes(state)
    non_noop = [a for a in actions if not a.is_noop]
    if not non_noop:
        return None
    Q = _posterior_q(ps, state, actions, process, config.model)
    nn = len(non_noop)
    cap = min(config.candidate_cap, nn)
    cols: set[int] = set()
    if cap >= nn:
        cols.update(range(nn))
    else:
        top = np.argpartition(-Q[:, :nn], cap - 1, axis=1)[:, :cap]
        cols.update(int(c) for c in np.unique(top))
    # canonical candidate order so the argmax tie-breaks deterministically
    candidates = sorted((actions[c], c) for c in cols)

    _, _, b_sel, b_sw, b_stop = _stacked_arrays(ps, process)
    scratch = PhaseScratch(Q, b_sel, b_sw, b_stop, config.model.argmax_beta)
    dU = _objective_utility_deltas(ps, state, actions, process)
    w = ps.weights

    best_change = None
    best_score = -np.inf
    for cand, col in candidates:
        M = np.exp(scratch.log_marginal(col))
        score = _step_gain_from(M, dU, w)
        if config.info_gain_weight > 0:
            score += config.info_gain_weight * _info_gain_from(M, w)
        if score > best_score:
            best_score = score
            best_change = cand
    return best_change


@dataclass(frozen=True)
class WhatIfReport:
    """What a change would do: the re-routed trip, its outcomes, the outcome
    deltas against the current state, and the posterior-mean utility delta."""

    change: DesignChange
    trip_after: Any
    outcomes_after: Any
    outcome_deltas: dict[str, float]
    posterior_mean_utility_delta: float

    def to_dict(self) -> dict:
        return {
            "change": self.change.describe(),
            "trip_after": list(self.trip_after.tour),
            "outcomes_after": self.outcomes_after.as_dict(),
            "outcome_deltas": dict(self.outcome_deltas),
            "posterior_mean_utility_delta": self.posterior_mean_utility_delta,
        }


def whatif(
    state,
    change: DesignChange,
    ps: ParticleSet,
    process: DesignProcess,
    config: AssistantConfig,
) -> WhatIfReport:
    """Evaluate a change counterfactually under objective routing."""
    if change not in process.legal_changes(state):
        raise IllegalChangeError(f"{change.describe()} is not legal here")
    after = process.apply(state, change)
    out_before = process.outcomes(state).as_dict()
    out_after = process.outcomes(after).as_dict()
    deltas = {k: out_after[k] - out_before[k] for k in out_after}
    thetas = np.stack([process.utility_weights(p.utility) for p in ps.particles])
    dphi = process.features(after) - process.features(state)
    mean_du = float(ps.weights @ (thetas @ dphi))
    return WhatIfReport(
        change=change,
        trip_after=after,
        outcomes_after=process.outcomes(after),
        outcome_deltas=deltas,
        posterior_mean_utility_delta=mean_du,
    )
