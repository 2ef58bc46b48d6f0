"""Design processes: states, changes, outcomes, utilities.

A design problem is treated as a decision process. The design is a state,
edits are actions, realizing a design yields a vector of outcomes, and a
parametric utility over those outcomes encodes the designer's goal. Concrete
domains subclass :class:`DesignProcess`; the user model, assistant, and
experiment harness are written against this interface only.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Sequence

import numpy as np


class DomainError(Exception):
    """Base class for design-domain errors."""


class InvalidStateError(DomainError):
    """A state violates the domain's validity rules."""


class IllegalChangeError(DomainError):
    """A change is not applicable in the given state."""


class ChangeKind(IntEnum):
    ADD = 0
    REMOVE = 1
    NOOP = 2


@dataclass(frozen=True, order=True)
class DesignChange:
    """Atomic design action: add an element, remove one, or do nothing.

    Ordering is (kind, target): adds by id, then removes by id, then NoOp.
    This is the canonical tie-break order used everywhere a deterministic
    choice among equally scored changes is needed.
    """

    kind: ChangeKind
    target: int = -1  # element id; -1 for NoOp

    def __post_init__(self):
        if self.kind is ChangeKind.NOOP:
            if self.target != -1:
                raise ValueError("NoOp carries no target")
        elif self.target < 0:
            raise ValueError(f"{self.kind.name} requires a non-negative target id")

    @property
    def is_noop(self) -> bool:
        return self.kind is ChangeKind.NOOP

    def describe(self) -> str:
        if self.is_noop:
            return "noop"
        return f"{self.kind.name.lower()}:{self.target}"

    @staticmethod
    def parse(text: str) -> "DesignChange":
        """Inverse of :meth:`describe` ("add:5", "remove:3", "noop")."""
        text = text.strip().lower()
        if text == "noop":
            return NOOP
        try:
            kind, _, target = text.partition(":")
            return DesignChange(ChangeKind[kind.upper()], int(target))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"unparseable change {text!r}") from exc


NOOP = DesignChange(ChangeKind.NOOP)


def add_poi(poi_id: int) -> DesignChange:
    return DesignChange(ChangeKind.ADD, poi_id)


def remove_poi(poi_id: int) -> DesignChange:
    return DesignChange(ChangeKind.REMOVE, poi_id)


class Dynamics(Enum):
    """Transition model selector.

    OBJECTIVE is what the system really does when a change is applied
    (re-route the tour optimally). SUBJECTIVE is the designer's mental
    model of the same transition (insertion heuristics, order-preserving
    removal). Both must be evaluable side by side in one process, so the
    model is an explicit argument rather than global state.
    """

    OBJECTIVE = "objective"
    SUBJECTIVE = "subjective"


class DesignProcess(ABC):
    """A concrete design domain.

    States are immutable values supplied by the domain; equal states must
    serialize identically. All methods are pure functions of their inputs
    and safe to call concurrently.
    """

    @abstractmethod
    def legal_changes(self, state, dynamics: Dynamics = Dynamics.OBJECTIVE) -> list[DesignChange]:
        """All changes applicable in `state`, NoOp included, canonical order."""

    @abstractmethod
    def apply(self, state, change: DesignChange, dynamics: Dynamics = Dynamics.OBJECTIVE):
        """Apply `change` to `state` under the given transition model.

        Returns a new state; never mutates the input. Raises
        IllegalChangeError for inapplicable changes.
        """

    @abstractmethod
    def outcomes(self, state):
        """Deterministic realized consequences of the design."""

    @abstractmethod
    def utility(self, state, utility_params) -> float:
        """Scalar utility of `state` under the given parameter vector."""

    @abstractmethod
    def serialize_state(self, state) -> str:
        """Canonical serialization; equal states produce equal strings."""

    @abstractmethod
    def validate_state(self, state) -> None:
        """Raise InvalidStateError if `state` breaks domain invariants."""

    # -- limited-horizon action values ------------------------------------

    def q_matrix(
        self,
        state,
        actions: Sequence[DesignChange],
        utility_params: Sequence[Any],
        horizons: Sequence[int],
        beam_width: int,
    ) -> np.ndarray:
        """Lookahead action values for a batch of parameter hypotheses.

        Entry [p, i] is the value of taking `actions[i]` in `state` under
        hypothesis p: the change is applied under SUBJECTIVE dynamics, then
        the best achievable utility within `horizons[p]` further subjective
        steps is returned. At each level only the `beam_width` children with
        the best immediate utility are expanded (ties at the cutoff are all
        retained); the NoOp child is always kept.

        This reference implementation enumerates the tree with scalar calls
        and works for any domain. Domains may override it with an equivalent
        vectorized version; overrides must return the same values.
        """
        out = np.empty((len(utility_params), len(actions)))
        for p, (params, horizon) in enumerate(zip(utility_params, horizons)):
            cache: dict[tuple, float] = {}
            for i, action in enumerate(actions):
                child = self.apply(state, action, Dynamics.SUBJECTIVE)
                out[p, i] = self._tree_value(child, int(horizon), params, beam_width, cache)
        return out

    def _tree_value(self, state, horizon: int, params, beam_width: int, cache: dict) -> float:
        key = (self.serialize_state(state), horizon)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if horizon == 0:
            value = self.utility(state, params)
        else:
            children = []
            for change in self.legal_changes(state, Dynamics.SUBJECTIVE):
                child = self.apply(state, change, Dynamics.SUBJECTIVE)
                children.append((self.utility(child, params), change.is_noop, child))
            scores = sorted((u for u, _, _ in children), reverse=True)
            cutoff = scores[beam_width - 1] if beam_width <= len(scores) else -np.inf
            value = max(
                self._tree_value(child, horizon - 1, params, beam_width, cache)
                for u, noop, child in children
                if noop or u >= cutoff
            )
        cache[key] = value
        return value
