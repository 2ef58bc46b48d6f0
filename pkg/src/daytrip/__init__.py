"""Cooperative day-trip design assistant.

A designer edits a trip one change at a time; the assistant infers what they
want from the choices it observes and recommends what-if changes that speed
the design up. Ships a library, a CLI (city generation, batch experiments,
HTTP service), and a particle-posterior assistant built on a generative model
of noisily rational designers.
"""

from .assistant import (
    AssistantConfig,
    JointParamPrior,
    Particle,
    ParticleSet,
    WhatIfReport,
    expected_info_gain,
    expected_step_gain,
    init_posterior,
    plan_recommendation,
    update_posterior,
    whatif,
)
from .city import City, CityConfig, PointOfInterest, generate_city, load_city, save_city
from .core import (
    NOOP,
    ChangeKind,
    DesignChange,
    DesignProcess,
    Dynamics,
    IllegalChangeError,
    InvalidStateError,
    add_poi,
    remove_poi,
)
from .harness import ExperimentConfig, ExperimentResult, RunTrace, run_experiment, run_single
from .routing import route_optimal
from .trip import (
    TripConfig,
    TripDesign,
    TripOutcomes,
    TripProcess,
    TripUtilityParams,
    TripUtilityPrior,
    trip_features,
    trip_outcomes,
    trip_utility,
)
from .user_model import (
    ChoiceObservation,
    UserModelConfig,
    UserModelParams,
    UserParamPrior,
    choice_distribution,
    log_likelihood,
    lookahead_value,
    sample_choice,
    subjective_insert,
)

__version__ = "0.1.0"
