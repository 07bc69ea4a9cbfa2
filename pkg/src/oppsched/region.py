"""The achievable mean-rate set of a model and queries against it.

The set of per-slot expectation vectors reachable by randomized stationary
feasible decisions is a compact convex body: the probability-weighted
Minkowski sum of the per-state option hulls.  Its linear-minimization oracle
is a cheap exact sum of per-state argmins, which drives projection,
membership, dominance, and the extraction of per-state time-sharing weights
for any achievable target.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import InputError, MembershipError
from .geometry import ConvexBody, HalfSpace
from .model import Model, validate

ENUMERATION_CAP = 1_000_000

# Projections certify distances to about sqrt(gap); keep the internal gap
# well below any membership tolerance callers are likely to use.
_GAP_FLOOR = 1e-12


@dataclass(frozen=True)
class RateRegion:
    model: Model
    body: ConvexBody

    @property
    def dim(self) -> int:
        return self.model.m


def rate_region(model: Model) -> RateRegion:
    """Build the region for a validated model."""
    validate(model).raise_on_error()
    probs = model.probs
    options = model.options

    def oracle(d: np.ndarray):
        point = np.zeros(model.m)
        choices = []
        for s in range(model.n_states):
            idx = int(np.argmin(options[s] @ d))  # ties to lowest option index
            choices.append(idx)
            point += probs[s] * options[s][idx]
        return point, tuple(choices)

    body = ConvexBody(dim=model.m, bound=model.bound, oracle=oracle)
    return RateRegion(model=model, body=body)


def lmo(region: RateRegion, d) -> np.ndarray:
    """Probability-weighted sum of per-state minimizers along d."""
    point, _ = region.body.lmo(geometry.as_vector(d, region.dim))
    return point


def support(region: RateRegion, a) -> float:
    return geometry.support(region.body, a)


def enumerate_generators(region: RateRegion, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All weighted sums choosing one option per state; their hull is the region.

    Refuses models whose per-state option counts multiply past the cap;
    switch to the oracle-only queries for those.
    """
    model = region.model
    counts = [arr.shape[0] for arr in model.options]
    total = math.prod(counts)
    if total > cap:
        raise InputError(
            f"{total} deterministic selections exceed the cap {cap}; "
            "use the oracle-based queries (lmo/membership/dominance) instead"
        )
    probs = model.probs
    out = np.empty((total, model.m))
    for row, combo in enumerate(itertools.product(*(range(c) for c in counts))):
        point = np.zeros(model.m)
        for s, idx in enumerate(combo):
            point += probs[s] * model.options[s][idx]
        out[row] = point
    return out


@dataclass(frozen=True)
class MembershipResult:
    inside: bool
    dist: float
    point: np.ndarray  # closest region point found
    certificate: HalfSpace | None  # separating half-space when outside

    def __bool__(self) -> bool:
        return self.inside


def membership(region: RateRegion, x, tol: float = 1e-10) -> MembershipResult:
    """Decide x in the region within sqrt(tol), with a certificate either way.

    Inside: the projection distance is at most sqrt(tol), witnessed by the
    feasible point found.  Outside: returns a supporting half-space (a, b)
    with a.x > b + tol.

    Tolerances below the gap floor are decided by driving the squared
    distance itself under tol, since the duality gap cannot be resolved past
    float precision at that scale.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    x = geometry.as_vector(x, region.dim)
    res = geometry.project_full(region.body, x, tol=_GAP_FLOOR, f_stop=tol)
    if tol < _GAP_FLOOR and tol < res.value <= tol + 2.0 * _GAP_FLOOR:
        # Gap-certified but still above the requested squared distance:
        # keep iterating on the primal value alone.
        res = geometry.project_full(
            region.body, x, tol=0.0, f_stop=tol,
            max_iter=geometry.MAX_ITER, on_cap="return",
        )
    dist = float(np.sqrt(max(res.value, 0.0)))
    if res.value <= tol:
        return MembershipResult(True, dist, res.point, None)
    a = (x - res.point) / dist
    a = a / float(np.linalg.norm(a))
    half = HalfSpace(a, support(region, a))
    return MembershipResult(False, dist, res.point, half)


def dominance(region: RateRegion, a, tol: float = 1e-10) -> bool:
    """True iff some region point weakly exceeds a in every component.

    Minimizes the squared norm of the componentwise shortfall (a - y)+ over
    the region; the verdict compares the certified minimum against tol.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    a = geometry.as_vector(a, region.dim)

    def f(y):
        short = np.maximum(a - y, 0.0)
        return float(short @ short)

    def grad(y):
        return -2.0 * np.maximum(a - y, 0.0)

    res = geometry.frank_wolfe(
        region.body, grad, f, tol=min(tol, _GAP_FLOOR), f_stop=0.0
    )
    return res.value <= tol


def shortfall(region: RateRegion, a, tol: float = 1e-10) -> float:
    """Norm of the smallest componentwise excess of a over the region."""
    a = geometry.as_vector(a, region.dim)

    def f(y):
        short = np.maximum(a - y, 0.0)
        return float(short @ short)

    def grad(y):
        return -2.0 * np.maximum(a - y, 0.0)

    res = geometry.frank_wolfe(
        region.body, grad, f, tol=min(tol, _GAP_FLOOR), f_stop=0.0
    )
    return float(np.sqrt(max(res.value, 0.0)))


@dataclass(frozen=True)
class TargetDecomposition:
    """Per-state simplex weights whose weighted mean reproduces the target."""

    target: np.ndarray
    weights: tuple[np.ndarray, ...]  # one simplex vector per state
    residual: float

    def mean(self, model: Model) -> np.ndarray:
        out = np.zeros(model.m)
        for s in range(model.n_states):
            out += model.probs[s] * (self.weights[s] @ model.options[s])
        return out


def decompose(region: RateRegion, x, tol: float = 1e-10) -> TargetDecomposition:
    """Per-state option weights achieving the target x.

    The projection's active atoms are deterministic per-state selections, so
    their convex weights regroup directly into per-state simplex vectors.
    Raises with the separating certificate when x is outside the region.
    """
    x = geometry.as_vector(x, region.dim)
    check = membership(region, x, tol)
    if not check.inside:
        raise MembershipError(x.tolist(), check.certificate)
    res = geometry.project_full(
        region.body, x, tol=min(tol, _GAP_FLOOR), f_stop=tol * 1e-4
    )
    model = region.model
    weights = [np.zeros(arr.shape[0]) for arr in model.options]
    for atom in res.atoms:
        choices = atom.tag
        for s, idx in enumerate(choices):
            weights[s][idx] += atom.weight
    mean = np.zeros(model.m)
    for s in range(model.n_states):
        total = weights[s].sum()
        if total > 0:
            weights[s] /= total
        mean += model.probs[s] * (weights[s] @ model.options[s])
    residual = float(np.linalg.norm(mean - x))
    if residual > math.sqrt(tol):
        raise MembershipError(x.tolist(), check.certificate)
    return TargetDecomposition(target=x, weights=tuple(weights), residual=residual)
