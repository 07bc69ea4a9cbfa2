"""Causal decision rules: observe states s_1..s_k, draw the slot uniform,
pick an option index.

Every policy here makes its slot-k choice from the observed state prefix and
the slot-k uniform carved out of one upfront randomization source, so
feasibility (the chosen index is always valid for the current state) and
causality (later states never matter) hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import InputError, MembershipError
from .model import Model, validate
from .randomize import RandSource, slot_uniform
from .region import RateRegion, TargetDecomposition, decompose, membership


@dataclass(frozen=True)
class History:
    """Observed state indices up to the current slot, plus the queue backlog
    when a queue-aware rule is running."""

    states: tuple[int, ...]
    queue: np.ndarray | None = None

    @property
    def k(self) -> int:
        return len(self.states)

    @property
    def current(self) -> int:
        if not self.states:
            raise InputError("history must contain at least one state")
        return self.states[-1]


def max_weight(q, options) -> int:
    """Index of the option maximizing the backlog-weighted rate q.x; ties go low."""
    q = np.asarray(q, dtype=np.float64)
    opts = np.atleast_2d(np.asarray(options, dtype=np.float64))
    if opts.shape[0] == 0:
        raise InputError("options must be nonempty")
    if np.any(q < 0):
        raise InputError("queue weights must be nonnegative")
    return int(np.argmax(opts @ q))


class Policy:
    """Base decision rule; subclasses implement ``select``."""

    uses_queue = False
    uses_randomness = True  # whether the slot uniform influences decisions

    def select(self, model: Model, states, u: float, queue=None) -> tuple[int, bool]:
        """Option index for the current state, plus a fallback flag.

        ``states`` is the observed state-index prefix; only the last entry
        and earlier ones may be read, never anything beyond.
        """
        raise NotImplementedError

    def choices_vector(self, model: Model, states: np.ndarray, us: np.ndarray):
        """All slot choices at once, when the rule depends only on
        (current state, slot uniform).  None means slot-by-slot selection."""
        return None

    def slot_mean(self, model: Model, prefix=(), queue=None) -> np.ndarray:
        """Exact expected decision vector for the next slot given the past."""
        raise NotImplementedError

    def kind(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class DeterministicPolicy(Policy):
    """Fixed choice function: always option psi[s] in state s."""

    uses_randomness = False

    psi: tuple[int, ...]

    def select(self, model, states, u, queue=None):
        return self.psi[states[-1]], False

    def choices_vector(self, model, states, us):
        return np.asarray(self.psi, dtype=np.int64)[states]

    def slot_mean(self, model, prefix=(), queue=None):
        out = np.zeros(model.m)
        for s in range(model.n_states):
            out += model.probs[s] * model.options[s][self.psi[s]]
        return out

    def kind(self):
        return "deterministic"


@dataclass(frozen=True)
class RandomizedStationaryPolicy(Policy):
    """Per-state time sharing: option i in state s with probability weights[s][i]."""

    weights: tuple[np.ndarray, ...]

    def __post_init__(self):
        ws = []
        for s, w in enumerate(self.weights):
            w = np.asarray(w, dtype=np.float64)
            if w.size == 0 or np.any(w < -1e-15):
                raise InputError(f"weights[{s}] must be a nonempty nonnegative vector")
            if abs(float(w.sum()) - 1.0) > 1e-9:
                raise InputError(f"weights[{s}] must sum to 1 within 1e-9")
            ws.append(w)
        object.__setattr__(self, "weights", tuple(ws))

    @cached_property
    def _cums(self) -> tuple[np.ndarray, ...]:
        cums = []
        for w in self.weights:
            c = np.cumsum(w)
            c[-1] = max(c[-1], 1.0)
            cums.append(c)
        return tuple(cums)

    def select(self, model, states, u, queue=None):
        return int(np.searchsorted(self._cums[states[-1]], u, side="left")), False

    def choices_vector(self, model, states, us):
        out = np.zeros(states.size, dtype=np.int64)
        for s, cum in enumerate(self._cums):
            mask = states == s
            if np.any(mask):
                out[mask] = np.searchsorted(cum, us[mask], side="left")
        return out

    def slot_mean(self, model, prefix=(), queue=None):
        out = np.zeros(model.m)
        for s in range(model.n_states):
            out += model.probs[s] * (self.weights[s] @ model.options[s])
        return out

    def kind(self):
        return "randomized"


@dataclass(frozen=True)
class TargetPolicy(RandomizedStationaryPolicy):
    """Randomized stationary rule whose per-slot mean hits a chosen target."""

    decomposition: TargetDecomposition = None

    def kind(self):
        return "target"

    @property
    def target(self) -> np.ndarray:
        return self.decomposition.target


@dataclass(frozen=True)
class MaxWeightPolicy(Policy):
    """Backlog-greedy rule: maximize queue.x among the current options."""

    uses_queue = True
    uses_randomness = False

    def select(self, model, states, u, queue=None):
        q = np.zeros(model.m) if queue is None else queue
        return max_weight(q, model.options[states[-1]]), False

    def slot_mean(self, model, prefix=(), queue=None):
        q = np.zeros(model.m) if queue is None else queue
        out = np.zeros(model.m)
        for s in range(model.n_states):
            out += model.probs[s] * model.options[s][max_weight(q, model.options[s])]
        return out

    def kind(self):
        return "maxweight"


@dataclass(frozen=True)
class CustomPolicy(Policy):
    """History-dependent rule given as a finite decision table.

    Keys are (state-index prefix, quantized uniform level); the slot uniform
    is quantized into ``levels`` equal cells.  Missing entries fall back to
    the guarded choice function psi on the current state, and the fallback is
    flagged so traces can record it.
    """

    table: Mapping[tuple[tuple[int, ...], int], int]
    levels: int
    psi: tuple[int, ...]

    def __post_init__(self):
        if self.levels < 1:
            raise InputError("levels must be >= 1")

    def select(self, model, states, u, queue=None):
        level = min(int(u * self.levels), self.levels - 1)
        entry = self.table.get((tuple(states), level))
        s = states[-1]
        if entry is None or not (0 <= entry < model.options[s].shape[0]):
            return self.psi[s], True
        return entry, False

    def slot_mean(self, model, prefix=(), queue=None):
        out = np.zeros(model.m)
        prefix = tuple(prefix)
        for s in range(model.n_states):
            acc = np.zeros(model.m)
            for level in range(self.levels):
                entry = self.table.get((prefix + (s,), level))
                if entry is None or not (0 <= entry < model.options[s].shape[0]):
                    entry = self.psi[s]
                acc += model.options[s][entry]
            out += model.probs[s] * (acc / self.levels)
        return out

    def kind(self):
        return "custom"


def decide(policy: Policy, model: Model, hist: History, src: RandSource) -> int:
    """Option index for the current slot, using only the observed prefix and
    the slot uniforms derived from the source."""
    if not hist.states:
        raise InputError("history must contain at least one state")
    s = hist.current
    if not (0 <= s < model.n_states):
        raise InputError(f"state index {s} out of range")
    u = slot_uniform(src, hist.k)
    queue = hist.queue if policy.uses_queue else None
    idx, _ = policy.select(model, hist.states, u, queue)
    if not (0 <= idx < model.options[s].shape[0]):
        raise InputError(f"policy produced invalid option {idx} for state {s}")
    return idx


def target_policy(region: RateRegion, x, tol: float = 1e-10) -> TargetPolicy:
    """Stationary randomized policy whose exact per-slot mean is x (within
    the decomposition residual).  Raises with a separating certificate when
    x is not achievable."""
    check = membership(region, x, tol)
    if not check.inside:
        raise MembershipError(np.asarray(x, dtype=float).tolist(), check.certificate)
    decomposition = decompose(region, x, tol)
    return TargetPolicy(weights=decomposition.weights, decomposition=decomposition)


def deterministic_policy(model: Model, psi=None) -> DeterministicPolicy:
    """Fixed-choice policy; defaults to the model's certified fallback."""
    report = validate(model)
    report.raise_on_error()
    chosen = tuple(psi) if psi is not None else report.psi
    for s, j in enumerate(chosen):
        if not (0 <= j < model.options[s].shape[0]):
            raise InputError(f"psi[{s}]={j} is not a valid option index")
    return DeterministicPolicy(psi=chosen)


def policy_from_dict(doc: dict, model: Model, region: RateRegion | None = None) -> Policy:
    """Parse the policy schema."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InputError("policy document must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "deterministic":
        return deterministic_policy(model, doc.get("psi"))
    if kind == "randomized":
        weights = doc.get("weights")
        if not isinstance(weights, list) or len(weights) != model.n_states:
            raise InputError("field 'weights' must list one simplex vector per state")
        ws = []
        for s, w in enumerate(weights):
            w = np.asarray(w, dtype=np.float64)
            if w.size != model.options[s].shape[0]:
                raise InputError(f"weights[{s}] must have one entry per option")
            ws.append(w)
        return RandomizedStationaryPolicy(weights=tuple(ws))
    if kind == "target":
        if "x" not in doc:
            raise InputError("target policy needs field 'x'")
        from .region import rate_region

        reg = region if region is not None else rate_region(model)
        return target_policy(reg, doc["x"], float(doc.get("tol", 1e-10)))
    if kind == "maxweight":
        return MaxWeightPolicy()
    raise InputError(f"unknown policy kind {kind!r}")
