"""Satisfiability of a single linear inequality over a box domain.

Every entailment query the explainer issues reduces to: does some point of
the box, with a subset of coordinates pinned, satisfy  w . z + bias REL c?
A linear function attains its extrema at box corners, so the answer comes
from one exact O(n) extremum scan instead of a general LP solve.  Strict
relations are compared exactly in binary64; a knife-edge flag reports when
the extremum lands within 1e-12 of the threshold so borderline calls can
be audited.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureSpace

RELATIONS = ("<", "<=", ">", ">=")
NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}
KNIFE_EDGE_TOL = 1e-12
MAX_ORACLE_FREE = 20


@dataclass(frozen=True, eq=False)
class LinearAtom:
    """One inequality  weights . z + bias  REL  threshold."""

    weights: np.ndarray
    bias: float
    relation: str
    threshold: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {self.relation!r}")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias) and np.isfinite(self.threshold)):
            raise ValueError("atom coefficients must be finite")
        object.__setattr__(self, "weights_tuple", tuple(w.tolist()))

    def negated(self) -> "LinearAtom":
        return LinearAtom(self.weights, self.bias, NEGATED[self.relation], self.threshold)

    def holds_at(self, x: np.ndarray) -> bool:
        value = float(np.dot(self.weights, np.asarray(x, dtype=float)) + self.bias)
        return _compare(value, self.relation, self.threshold)

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"LinearAtom(d {self.relation} {self.threshold})"


@dataclass(frozen=True)
class PartialAssignment:
    """Coordinates pinned to concrete values; the rest range over the box."""

    fixed: dict[int, float]

    @classmethod
    def of_instance(cls, x: np.ndarray) -> "PartialAssignment":
        return cls({i: float(v) for i, v in enumerate(np.asarray(x, dtype=float))})

    @classmethod
    def empty(cls) -> "PartialAssignment":
        return cls({})

    def without(self, index: int) -> "PartialAssignment":
        trimmed = dict(self.fixed)
        trimmed.pop(index, None)
        return PartialAssignment(trimmed)

    def __len__(self) -> int:
        return len(self.fixed)


@dataclass(frozen=True, eq=False)
class SatResult:
    satisfiable: bool
    witness: np.ndarray | None = None
    knife_edge: bool = False

    def __bool__(self) -> bool:
        return self.satisfiable


@dataclass
class QueryCounter:
    """Counts feasibility queries, for complexity asserts and timing reports.

    Also tallies knife-edge answers (extremum within 1e-12 of the threshold)
    so borderline strict comparisons can be audited downstream.
    """

    count: int = 0
    knife_edges: int = 0

    def tick(self) -> None:
        self.count += 1


def _compare(value: float, relation: str, threshold: float) -> bool:
    if relation == "<":
        return value < threshold
    if relation == "<=":
        return value <= threshold
    if relation == ">":
        return value > threshold
    return value >= threshold


def _check_assignment(n: int, pa: PartialAssignment, space: FeatureSpace) -> None:
    if len(space) != n:
        raise ValueError(f"atom has {n} weights but the space has {len(space)} features")
    lower, upper = space.lower_tuple, space.upper_tuple
    for i, v in pa.fixed.items():
        if not 0 <= i < n:
            raise ValueError(f"fixed index {i} out of range for {n} features")
        if not lower[i] <= v <= upper[i]:
            raise ValueError(
                f"fixed value {v} for feature {space.names[i]!r} "
                f"outside its domain [{lower[i]}, {upper[i]}]"
            )


def linear_extrema(weights, bias: float, pa: PartialAssignment, space: FeatureSpace) -> tuple[float, float]:
    """Exact (min, max) of weights . z + bias over the restricted box.

    Free coordinates contribute min/max(w_i * l_i, w_i * u_i); accumulation
    runs in ascending index order so results are bit-reproducible.
    """
    w = tuple(np.asarray(weights, dtype=float).tolist())
    n = len(w)
    _check_assignment(n, pa, space)
    fixed = pa.fixed
    lower, upper = space.lower_tuple, space.upper_tuple
    lo = hi = float(bias)
    for i in range(n):
        wi = w[i]
        if i in fixed:
            term = wi * fixed[i]
            lo += term
            hi += term
        else:
            a = wi * lower[i]
            b = wi * upper[i]
            if a <= b:
                lo += a
                hi += b
            else:
                lo += b
                hi += a
    return lo, hi


def _scan_bound(w, bias: float, fixed: dict, space: FeatureSpace, want_max: bool) -> float:
    """Single-sided extremum in one ascending-index pass, validating fixed
    values against their domains along the way."""
    lower, upper = space.lower_tuple, space.upper_tuple
    get = fixed.get
    acc = bias
    seen = 0
    if want_max:
        for i, wi in enumerate(w):
            v = get(i)
            if v is None:
                a = wi * lower[i]
                b = wi * upper[i]
                acc += b if b >= a else a
            else:
                if not lower[i] <= v <= upper[i]:
                    raise ValueError(
                        f"fixed value {v} for feature {space.names[i]!r} "
                        f"outside its domain [{lower[i]}, {upper[i]}]"
                    )
                acc += wi * v
                seen += 1
    else:
        for i, wi in enumerate(w):
            v = get(i)
            if v is None:
                a = wi * lower[i]
                b = wi * upper[i]
                acc += a if a <= b else b
            else:
                if not lower[i] <= v <= upper[i]:
                    raise ValueError(
                        f"fixed value {v} for feature {space.names[i]!r} "
                        f"outside its domain [{lower[i]}, {upper[i]}]"
                    )
                acc += wi * v
                seen += 1
    if seen != len(fixed):
        raise ValueError(f"fixed indices out of range for {len(w)} features")
    return acc


def _extreme_point(w, fixed: dict, space: FeatureSpace, want_max: bool) -> np.ndarray:
    """The box corner attaining the one-sided extremum (fixed coords kept).

    Zero-weight coordinates contribute nothing and pin to the lower bound
    for determinism.
    """
    lower, upper = space.lower_tuple, space.upper_tuple
    if want_max:
        x = [upper[i] if wi > 0 else lower[i] for i, wi in enumerate(w)]
    else:
        x = [lower[i] if wi >= 0 else upper[i] for i, wi in enumerate(w)]
    for i, v in fixed.items():
        x[i] = v
    return np.array(x)


def satisfiable(atom: LinearAtom, pa: PartialAssignment, space: FeatureSpace,
                counter: QueryCounter | None = None) -> SatResult:
    """Decide the atom over the restricted box; return a witness point when SAT.

    The extremum of the relevant side is attained on the closed box, so
    strict relations are decided exactly: d > c is satisfiable iff max > c,
    d <= c iff min <= c, and so on.
    """
    if counter is not None:
        counter.tick()
    w = atom.weights_tuple
    if len(space) != len(w):
        raise ValueError(
            f"atom has {len(w)} weights but the space has {len(space)} features"
        )
    want_max = atom.relation in (">", ">=")
    extremum = _scan_bound(w, float(atom.bias), pa.fixed, space, want_max)
    sat = _compare(extremum, atom.relation, atom.threshold)
    knife = abs(extremum - atom.threshold) < KNIFE_EDGE_TOL
    if knife and counter is not None:
        counter.knife_edges += 1
    if not sat:
        return SatResult(False, None, knife)
    return SatResult(True, _extreme_point(w, pa.fixed, space, want_max), knife)


def satisfiable_vertex_oracle(atom: LinearAtom, pa: PartialAssignment, space: FeatureSpace) -> bool:
    """Brute-force check over all 2^k corners of the free sub-box (test oracle).

    Linear functions attain their extrema at vertices, so enumerating
    corners decides satisfiability.  Refuses more than MAX_ORACLE_FREE free
    coordinates.
    """
    w = atom.weights
    n = w.shape[0]
    _check_assignment(n, pa, space)
    free = np.array([i for i in range(n) if i not in pa.fixed], dtype=int)
    k = free.size
    if k > MAX_ORACLE_FREE:
        raise ValueError(f"{k} free coordinates exceed the oracle limit of {MAX_ORACLE_FREE}")
    base = float(atom.bias) + sum(w[i] * v for i, v in pa.fixed.items())
    if k == 0:
        return _compare(base, atom.relation, atom.threshold)
    bits = (np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1
    corners = space.lower[free] + bits * (space.upper[free] - space.lower[free])
    values = base + corners @ w[free]
    if atom.relation == "<":
        return bool(np.any(values < atom.threshold))
    if atom.relation == "<=":
        return bool(np.any(values <= atom.threshold))
    if atom.relation == ">":
        return bool(np.any(values > atom.threshold))
    return bool(np.any(values >= atom.threshold))
