"""Slot-by-slot simulation and the statistical/exact verifiers.

A run draws i.i.d. states, lets the policy pick one option per slot from the
observed prefix and its slot uniform, and records everything needed to replay
or audit the run: per-slot decisions, the running average (computed by the
exact recursion A_k = A_{k-1} + (x_k - A_{k-1})/k), optional queue backlogs,
and region distances at dyadic checkpoint slots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import Model, sample_states, validate
from .policy import MaxWeightPolicy, Policy
from .randomize import RandSource, slot_uniforms
from .region import RateRegion, membership, rate_region


def checkpoint_slots(horizon: int) -> np.ndarray:
    """Powers of two up to the horizon, plus the final slot."""
    slots = []
    c = 1
    while c <= horizon:
        slots.append(c)
        c *= 2
    if slots[-1] != horizon:
        slots.append(horizon)
    return np.array(slots, dtype=np.int64)


@dataclass
class Trace:
    """Complete record of one run, replayable from (model, policy, seed, K)."""

    seed: int
    horizon: int
    policy_kind: str
    states: np.ndarray  # (K,) state indices
    choices: np.ndarray  # (K,) option indices
    x: np.ndarray  # (K, m) decision vectors
    averages: np.ndarray  # (K, m) running averages
    fallbacks: np.ndarray  # (K,) guarded-fallback flags
    checkpoints: np.ndarray  # checkpoint slots
    checkpoint_dists: np.ndarray | None  # dist of the running average to the region
    queues: np.ndarray | None = None  # (K, m) backlog after each slot
    arrivals: np.ndarray | None = None  # (K, m) arrivals per slot

    @property
    def final_average(self) -> np.ndarray:
        return self.averages[-1]


def run(
    model: Model,
    policy: Policy,
    horizon: int,
    seed: int,
    *,
    arrivals=None,
    region: RateRegion | None = None,
    compute_dists: bool = True,
    tol: float = 1e-10,
) -> Trace:
    """Simulate ``horizon`` slots.

    States, policy randomness, and arrival randomness come from disjoint
    child streams of the seed, so the trace is a pure function of
    (model, policy, seed, horizon).
    """
    if horizon < 1:
        raise InputError(f"horizon must be >= 1, got {horizon}")
    validate(model).raise_on_error()

    root = RandSource(seed)
    slots = np.arange(1, horizon + 1, dtype=np.uint64)
    u_state = slot_uniforms(root.stream("states"), slots)
    states = sample_states(model, u_state)
    # Rules that ignore their slot uniforms never consume the policy stream.
    u_policy = (
        slot_uniforms(root.stream("policy"), slots)
        if policy.uses_randomness
        else np.zeros(horizon)
    )

    m = model.m
    options = model.options
    track_queue = arrivals is not None
    if track_queue:
        arrival_rows = arrivals.sample_all(horizon, model.m, root.stream("arrivals"))
        queues = np.empty((horizon, m))
    else:
        arrival_rows = None
        queues = None
    queue = np.zeros(m) if (track_queue or policy.uses_queue) else None

    fallbacks = np.zeros(horizon, dtype=bool)
    vec_choices = None
    if not policy.uses_queue:
        vec_choices = policy.choices_vector(model, states, u_policy)

    if vec_choices is not None:
        choices = np.asarray(vec_choices, dtype=np.int64)
        counts = np.array([arr.shape[0] for arr in options])
        if np.any(choices < 0) or np.any(choices >= counts[states]):
            bad = int(np.argmax((choices < 0) | (choices >= counts[states])))
            raise InputError(
                f"policy produced invalid option {int(choices[bad])} "
                f"in state {int(states[bad])}"
            )
        offsets = np.zeros(len(options), dtype=np.int64)
        offsets[1:] = np.cumsum(counts)[:-1]
        stacked = np.vstack([arr if arr.size else np.zeros((0, m)) for arr in options])
        xs = stacked[offsets[states] + choices]
        if track_queue:
            for k in range(1, horizon + 1):
                queue = np.maximum(queue + arrival_rows[k - 1] - xs[k - 1], 0.0)
                queues[k - 1] = queue
    else:
        choices = np.empty(horizon, dtype=np.int64)
        xs = np.empty((horizon, m))
        prefix: list[int] = []
        u_list = u_policy.tolist()
        states_list = states.tolist()
        greedy = isinstance(policy, MaxWeightPolicy)
        for k in range(1, horizon + 1):
            s = states_list[k - 1]
            prefix.append(s)
            if greedy:
                idx, fb = int(np.argmax(options[s] @ queue)), False
            else:
                idx, fb = policy.select(model, prefix, u_list[k - 1], queue)
                if not (0 <= idx < options[s].shape[0]):
                    raise InputError(
                        f"policy produced invalid option {idx} in state {s}"
                    )
            choices[k - 1] = idx
            x = options[s][idx]
            xs[k - 1] = x
            fallbacks[k - 1] = fb
            if track_queue:
                queue = np.maximum(queue + arrival_rows[k - 1] - x, 0.0)
                queues[k - 1] = queue

    averages = _running_averages(xs)

    cps = checkpoint_slots(horizon)
    if compute_dists:
        reg = region if region is not None else rate_region(model)
        dists = np.array(
            [membership(reg, averages[c - 1], tol).dist for c in cps]
        )
    else:
        dists = None

    return Trace(
        seed=seed,
        horizon=horizon,
        policy_kind=policy.kind(),
        states=states,
        choices=choices,
        x=xs,
        averages=averages,
        fallbacks=fallbacks,
        checkpoints=cps,
        checkpoint_dists=dists,
        queues=queues,
        arrivals=arrival_rows,
    )


def _running_averages(xs: np.ndarray) -> np.ndarray:
    """Exact recursion A_k = A_{k-1} + (x_k - A_{k-1})/k, columnwise.

    Scalar float and vector float64 arithmetic round identically, so this
    matches the slot-by-slot vector recursion bit for bit.
    """
    horizon, m = xs.shape
    out = np.empty((horizon, m))
    for c in range(m):
        col = xs[:, c].tolist()
        acc = 0.0
        dst = out[:, c]
        for k in range(1, horizon + 1):
            acc = acc + (col[k - 1] - acc) / k
            dst[k - 1] = acc
    return out


def write_trace_csv(trace: Trace, model: Model, path) -> None:
    """Columnar slot record; checkpoint distances appear only on their slots."""
    m = model.m
    cp_pos = {int(c): i for i, c in enumerate(trace.checkpoints)}
    with open(path, "w", newline="") as fh:
        header = ["k", "state_label", "option_index"]
        header += [f"x_{c}" for c in range(m)]
        header += [f"avg_{c}" for c in range(m)]
        header.append("dist_checkpoint")
        if trace.queues is not None:
            header += [f"q_{c}" for c in range(m)]
        fh.write(",".join(header) + "\n")
        for k in range(1, trace.horizon + 1):
            row = [
                str(k),
                model.label(int(trace.states[k - 1])),
                str(int(trace.choices[k - 1])),
            ]
            row += [repr(float(v)) for v in trace.x[k - 1]]
            row += [repr(float(v)) for v in trace.averages[k - 1]]
            if trace.checkpoint_dists is not None and k in cp_pos:
                row.append(repr(float(trace.checkpoint_dists[cp_pos[k]])))
            else:
                row.append("")
            if trace.queues is not None:
                row += [repr(float(v)) for v in trace.queues[k - 1]]
            fh.write(",".join(row) + "\n")


# --- verifiers --------------------------------------------------------------

@dataclass(frozen=True)
class MeanMembershipReport:
    """Monte Carlo check that the slot-k mean decision lies in the region.

    Statistical: the margin is 3*D/sqrt(R), so a correct policy fails with
    probability well under 1e-2.
    """

    slot: int
    replications: int
    estimate: np.ndarray
    dist: float
    margin: float
    passed: bool
    statistical: bool = True


def verify_mean_membership(
    model: Model,
    policy: Policy,
    replications: int = 1000,
    slot: int = 1,
    tol: float = 1e-10,
    *,
    seed: int = 0,
    region: RateRegion | None = None,
    arrivals=None,
) -> MeanMembershipReport:
    """Estimate E[X_k] over independent seeds and test region membership."""
    if replications < 1000:
        raise InputError("mean-membership checks need at least 1000 replications")
    reg = region if region is not None else rate_region(model)
    root = RandSource(seed)
    total = np.zeros(model.m)
    for r in range(replications):
        rep_seed = root.stream(f"rep-{r}").seed
        trace = run(
            model, policy, slot, rep_seed,
            arrivals=arrivals, region=reg, compute_dists=False,
        )
        total += trace.x[slot - 1]
    estimate = total / replications
    dist = membership(reg, estimate, tol).dist
    margin = 3.0 * model.bound / math.sqrt(replications)
    return MeanMembershipReport(
        slot=slot,
        replications=replications,
        estimate=estimate,
        dist=dist,
        margin=margin,
        passed=bool(dist <= margin),
    )


@dataclass(frozen=True)
class AvgConvergenceReport:
    """Distances of the running average to the region at checkpoint slots."""

    checkpoints: np.ndarray
    dists: np.ndarray
    final_dist: float
    final_bound: float
    burn_in: int
    monotone_after_burn_in: bool
    insufficient_horizon: bool
    passed: bool


def verify_avg_convergence(
    trace: Trace,
    region: RateRegion,
    checkpoints=None,
    tol: float = 1e-10,
) -> AvgConvergenceReport:
    """Check the trace's running average approaches the region.

    The final checkpoint distance must fall under 3*D/sqrt(K) + sqrt(tol),
    and after a burn-in of K/10 the checkpoint maxima (the largest distance
    from each checkpoint onward) must be non-increasing with sqrt(tol) slack;
    raw per-checkpoint distances bounce at noise scale even for correct
    policies, so the envelope is what shrinks.  Horizons under 100 slots are
    marked insufficient and only the final bound is asserted.
    """
    if checkpoints is None:
        cps = trace.checkpoints
        if trace.checkpoint_dists is not None and not np.any(
            np.isnan(trace.checkpoint_dists)
        ):
            dists = trace.checkpoint_dists
        else:
            dists = np.array(
                [membership(region, trace.averages[c - 1], tol).dist for c in cps]
            )
    else:
        cps = np.asarray(checkpoints, dtype=np.int64)
        if cps.size == 0 or int(cps.min()) < 1 or int(cps.max()) > trace.horizon:
            raise InputError("checkpoints must be slot indices within the horizon")
        dists = np.array(
            [membership(region, trace.averages[c - 1], tol).dist for c in cps]
        )

    horizon = trace.horizon
    bound = region.model.bound
    final_dist = float(dists[-1])
    final_bound = 3.0 * bound / math.sqrt(horizon) + math.sqrt(tol)
    burn_in = horizon // 10
    slack = math.sqrt(tol)
    insufficient = horizon < 100

    tail = [float(d) for c, d in zip(cps, dists) if c >= burn_in]
    suffix_maxima = [max(tail[i:]) for i in range(len(tail))]
    monotone = all(
        b <= a + slack for a, b in zip(suffix_maxima, suffix_maxima[1:])
    )
    final_ok = final_dist <= final_bound
    passed = final_ok and (monotone or insufficient)
    return AvgConvergenceReport(
        checkpoints=cps,
        dists=dists,
        final_dist=final_dist,
        final_bound=final_bound,
        burn_in=burn_in,
        monotone_after_burn_in=monotone,
        insufficient_horizon=insufficient,
        passed=bool(passed),
    )


@dataclass(frozen=True)
class ConditionalMembershipReport:
    """Exact conditional means of the slot-k decision, one per realized
    decision prefix, with their distances to the region."""

    slot: int
    prefixes: int
    max_dist: float
    dist_tol: float
    passed: bool


def verify_conditional_membership(
    model: Model,
    policy: Policy,
    slot: int,
    *,
    levels: int | None = None,
    dist_tol: float = 1e-9,
    cap: int = 1_000_000,
    region: RateRegion | None = None,
) -> ConditionalMembershipReport:
    """Enumerate decision prefixes exactly and test each conditional mean.

    Policies draw only the current slot's uniform, so conditioning on the
    quantized-randomness path collapses to conditioning on the state prefix;
    the conditional mean of the slot decision given a prefix is computed
    exactly from the policy's weights.  Queue-aware rules are evaluated with
    an empty backlog.
    """
    if slot < 1:
        raise InputError("slot must be >= 1")
    reg = region if region is not None else rate_region(model)
    n = model.n_states
    if levels is None:
        levels = getattr(policy, "levels", 1)
    paths = (n * max(1, levels)) ** slot
    if paths > cap:
        raise InputError(
            f"{paths} enumeration paths exceed the cap {cap}; use a smaller slot index"
        )

    tol_f = dist_tol * dist_tol
    max_dist = 0.0
    count = 0
    for prefix in _state_prefixes(n, slot - 1):
        mean = policy.slot_mean(model, prefix)
        res = membership(reg, mean, tol=tol_f)
        max_dist = max(max_dist, res.dist)
        count += 1
        if not res.inside:
            return ConditionalMembershipReport(
                slot=slot, prefixes=count, max_dist=max_dist,
                dist_tol=dist_tol, passed=False,
            )
    return ConditionalMembershipReport(
        slot=slot, prefixes=count, max_dist=max_dist, dist_tol=dist_tol, passed=True
    )


def _state_prefixes(n_states: int, length: int):
    if length == 0:
        yield ()
        return
    yield from itertools.product(range(n_states), repeat=length)


@dataclass(frozen=True)
class MartingaleCheck:
    """Per-slot deviations of decisions from their exact conditional means."""

    diffs: np.ndarray  # (K, m)
    partial_sums: np.ndarray  # (K, m) cumulative sums of diffs

    @property
    def final_average_norm(self) -> float:
        return float(np.linalg.norm(self.partial_sums[-1] / self.diffs.shape[0]))


def martingale_check(trace: Trace, model: Model, policy: Policy) -> MartingaleCheck:
    """Deviations x_k minus the policy's exact slot-k conditional mean.

    Means come from the policy weights, never from estimates, so the partial
    sums average a genuine zero-mean bounded sequence.
    """
    horizon = trace.horizon
    diffs = np.empty((horizon, model.m))
    stationary = policy.kind() in ("deterministic", "randomized", "target")
    if stationary:
        mean = policy.slot_mean(model)
        diffs = trace.x - mean
    elif policy.kind() == "maxweight":
        queue = np.zeros(model.m)
        for k in range(1, horizon + 1):
            diffs[k - 1] = trace.x[k - 1] - policy.slot_mean(model, queue=queue)
            if trace.queues is not None:
                queue = trace.queues[k - 1]
    else:
        states = trace.states
        for k in range(1, horizon + 1):
            prefix = tuple(int(s) for s in states[: k - 1])
            diffs[k - 1] = trace.x[k - 1] - policy.slot_mean(model, prefix)
    return MartingaleCheck(diffs=diffs, partial_sums=np.cumsum(diffs, axis=0))
