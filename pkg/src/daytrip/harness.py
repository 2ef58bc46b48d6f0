"""Batch experiments: simulated assisted vs unassisted designers.

Each run draws a fresh random city and a ground-truth designer (utility +
bounded-rationality parameters) from the same prior the assistant uses as
its hypothesis set. The designer iterates from an empty trip; in the
assisted arm the assistant recommends before every choice and updates its
posterior after it. Both arms of run k share the city, the ground truth, and
the designer's random stream (paired seeds), so arm differences come from
the recommendations alone. True utility is always evaluated under objective
routing, whatever the designer believed.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assistant import (
    AssistantConfig,
    JointParamPrior,
    init_posterior,
    plan_recommendation,
    update_posterior,
)
from .city import CityConfig, generate_city
from .core import DesignChange, Dynamics
from .trip import TripConfig, TripDesign, TripProcess, TripUtilityPrior
from .user_model import ChoiceObservation, UserModelConfig, UserParamPrior, sample_choice

ARMS = ("assisted", "unassisted")


@dataclass(frozen=True)
class ExperimentConfig:
    n_pois: int = 100
    n_iterations: int = 100
    n_runs: int = 200
    seed: int = 0
    city: CityConfig = field(default_factory=CityConfig)
    trip: TripConfig = field(default_factory=TripConfig)
    assistant: AssistantConfig = field(default_factory=AssistantConfig)

    def __post_init__(self):
        if self.n_pois < 1:
            raise ValueError("n_pois must be >= 1")
        if self.n_iterations < 0:
            raise ValueError("n_iterations must be >= 0")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        if "city" in doc:
            doc["city"] = CityConfig(**_tupled(doc["city"]))
        if "trip" in doc:
            doc["trip"] = TripConfig(**doc["trip"])
        if "assistant" in doc:
            a = dict(doc["assistant"])
            if "model" in a:
                a["model"] = UserModelConfig(**a["model"])
            doc["assistant"] = AssistantConfig(**a)
        return ExperimentConfig(**doc)


def _tupled(city_doc: dict) -> dict:
    out = dict(city_doc)
    for key in ("visit_duration_range", "entry_cost_range"):
        if key in out:
            out[key] = tuple(out[key])
    return out


def make_prior(config: ExperimentConfig) -> JointParamPrior:
    return JointParamPrior(
        utility_prior=TripUtilityPrior(n_categories=config.city.n_categories),
        user_prior=UserParamPrior(horizon_max=config.assistant.model.horizon_max),
    )


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    chosen: DesignChange
    recommendation: DesignChange | None
    utility: float
    posterior_entropy: float  # NaN in unassisted runs


@dataclass(frozen=True)
class RunTrace:
    arm: str
    run_seed: int
    records: tuple[IterationRecord, ...]
    truth_utility: object
    truth_user: object

    @property
    def utilities(self) -> np.ndarray:
        return np.array([r.utility for r in self.records])

    @property
    def entropies(self) -> np.ndarray:
        return np.array([r.posterior_entropy for r in self.records])


def run_single(
    config: ExperimentConfig,
    run_seed: int,
    assisted: bool,
    truth: tuple | None = None,
) -> RunTrace:
    """One simulated design session, fully reproducible from run_seed.

    The city, ground-truth designer, designer noise, and assistant streams
    are independent substreams of (config.seed, run_seed), so toggling
    `assisted` changes nothing but the recommendation loop.
    """
    ss = np.random.SeedSequence(entropy=config.seed, spawn_key=(run_seed,))
    city_ss, truth_ss, designer_ss, assistant_ss = ss.spawn(4)
    city = generate_city(config.n_pois, city_ss, config.city)
    process = TripProcess(city, config.trip)
    prior = make_prior(config)
    if truth is None:
        truth_utility, truth_user = prior.sample(np.random.default_rng(truth_ss))
    else:
        truth_utility, truth_user = truth
    designer_rng = np.random.default_rng(designer_ss)
    ps = init_posterior(prior, config.assistant, assistant_ss) if assisted else None

    trip = TripDesign()
    records = []
    for it in range(config.n_iterations):
        rec = plan_recommendation(ps, trip, process, config.assistant) if assisted else None
        chosen = sample_choice(
            process, trip, rec, truth_utility, truth_user, designer_rng, config.assistant.model
        )
        obs = ChoiceObservation(trip, rec, chosen)
        trip = process.apply(trip, chosen, Dynamics.OBJECTIVE)
        entropy = float("nan")
        if assisted:
            ps = update_posterior(ps, obs, process, config.assistant)
            entropy = ps.entropy()
        records.append(
            IterationRecord(it, chosen, rec, process.utility(trip, truth_utility), entropy)
        )
    return RunTrace(
        arm="assisted" if assisted else "unassisted",
        run_seed=run_seed,
        records=tuple(records),
        truth_utility=truth_utility,
        truth_user=truth_user,
    )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    arms: tuple[str, ...]
    utilities: dict[str, np.ndarray]  # arm -> (n_runs, n_iterations)
    entropies: dict[str, np.ndarray]

    def aggregate_rows(self) -> list[tuple[int, str, float, float, int]]:
        """(iteration, arm, mean_utility, stderr, n_runs) per iteration/arm."""
        rows = []
        for it in range(self.config.n_iterations):
            for arm in self.arms:
                u = self.utilities[arm][:, it]
                n = len(u)
                se = float(np.std(u, ddof=1) / np.sqrt(n)) if n >= 2 else 0.0
                rows.append((it, arm, float(np.mean(u)), se, n))
        return rows

    def write_csv(self, path) -> None:
        lines = ["iteration,arm,mean_utility,stderr,n_runs"]
        for it, arm, mean, se, n in self.aggregate_rows():
            lines.append(f"{it},{arm},{mean!r},{se!r},{n}")
        Path(path).write_text("\n".join(lines) + "\n")

    def final_stats(self, arm: str) -> tuple[float, float]:
        u = self.utilities[arm][:, -1]
        n = len(u)
        se = float(np.std(u, ddof=1) / np.sqrt(n)) if n >= 2 else 0.0
        return float(np.mean(u)), se

    def paired_final_gap(self) -> tuple[float, float]:
        """Mean and standard error of per-run (assisted - unassisted) final
        utility; valid because arms share per-run seeds."""
        d = self.utilities["assisted"][:, -1] - self.utilities["unassisted"][:, -1]
        n = len(d)
        se = float(np.std(d, ddof=1) / np.sqrt(n)) if n >= 2 else 0.0
        return float(np.mean(d)), se

    def summary_lines(self) -> list[str]:
        lines = []
        for arm in self.arms:
            mean, se = self.final_stats(arm)
            lines.append(
                f"{arm}: final mean utility {mean:.4f} +/- {2 * se:.4f} (2 SE, "
                f"{self.config.n_runs} runs)"
            )
        if set(ARMS) <= set(self.arms):
            gap, se = self.paired_final_gap()
            lines.append(f"paired gap (assisted - unassisted): {gap:.4f} +/- {2 * se:.4f} (2 SE)")
        return lines


def _run_task(args) -> tuple[str, int, RunTrace]:
    config, arm, k = args
    return arm, k, run_single(config, k, assisted=(arm == "assisted"))


def run_experiment(
    config: ExperimentConfig,
    arms: tuple[str, ...] = ARMS,
    workers: int = 1,
    trace_path=None,
) -> ExperimentResult:
    """All runs for the requested arms, aggregated per iteration.

    Runs are independent and may execute in parallel; aggregation is a
    fixed-order reduction over run indices, so results do not depend on
    worker count or scheduling.
    """
    for arm in arms:
        if arm not in ARMS:
            raise ValueError(f"unknown arm {arm!r}")
    tasks = [(config, arm, k) for arm in arms for k in range(config.n_runs)]
    traces: dict[tuple[str, int], RunTrace] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for arm, k, trace in pool.map(_run_task, tasks, chunksize=1):
                traces[(arm, k)] = trace
    else:
        for task in tasks:
            arm, k, trace = _run_task(task)
            traces[(arm, k)] = trace

    utilities = {}
    entropies = {}
    for arm in arms:
        utilities[arm] = np.stack(
            [traces[(arm, k)].utilities for k in range(config.n_runs)]
        ) if config.n_iterations else np.zeros((config.n_runs, 0))
        entropies[arm] = np.stack(
            [traces[(arm, k)].entropies for k in range(config.n_runs)]
        ) if config.n_iterations else np.zeros((config.n_runs, 0))

    if trace_path is not None:
        _dump_traces(traces, arms, config.n_runs, trace_path)
    return ExperimentResult(config=config, arms=tuple(arms), utilities=utilities, entropies=entropies)


def _dump_traces(traces, arms, n_runs, path) -> None:
    with open(path, "w") as fh:
        for arm in arms:
            for k in range(n_runs):
                for rec in traces[(arm, k)].records:
                    fh.write(
                        json.dumps(
                            {
                                "arm": arm,
                                "run": k,
                                "iteration": rec.iteration,
                                "chosen": rec.chosen.describe(),
                                "recommendation": (
                                    rec.recommendation.describe() if rec.recommendation else None
                                ),
                                "utility": rec.utility,
                                "posterior_entropy": (
                                    None
                                    if np.isnan(rec.posterior_entropy)
                                    else rec.posterior_entropy
                                ),
                            }
                        )
                        + "\n"
                    )
