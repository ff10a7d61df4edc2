"""Subset-minimal explanations for predictions of a linear model with reject band.

An explanation of instance x is a subset of its feature-value pairs that
forces the same prediction for every completion of the remaining features
inside their domains.  The predicted class is encoded as a conjunction of
linear atoms; entailment of that formula by a partial assignment is decided
by checking every atom of its negation for unsatisfiability over the box.
Dropping one feature at a time and keeping it exactly when entailment
breaks yields a subset-minimal result in at most 2n feasibility queries.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .dataset import FeatureSpace
from .feasibility import LinearAtom, PartialAssignment, QueryCounter, satisfiable
from .rejector import RejectModel, predict_with_reject


@dataclass(frozen=True)
class PredictionFormula:
    """Conjunction of atoms pinning the prediction to one class.

    The reject class needs both band inequalities; either decided class is a
    single strict atom.
    """

    atoms: tuple[LinearAtom, ...]
    klass: int

    def __post_init__(self):
        if self.klass not in (-1, 0, 1):
            raise ValueError("class must be -1, 0 or +1")
        expected = 2 if self.klass == 0 else 1
        if len(self.atoms) != expected:
            raise ValueError(f"class {self.klass:+d} formula needs {expected} atom(s)")


@dataclass(frozen=True)
class NegatedFormula:
    """Disjunction of atoms, obtained from a PredictionFormula by relation flips."""

    atoms: tuple[LinearAtom, ...]


@dataclass(frozen=True)
class EntailmentResult:
    holds: bool
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True, eq=False)
class Explanation:
    """Kept feature-value pairs plus certificates that none can be dropped."""

    instance: np.ndarray
    klass: int
    kept: tuple[tuple[int, float], ...]
    removed: tuple[int, ...]
    certificates: dict[int, np.ndarray]
    time_seconds: float
    queries: int
    knife_edge_queries: int = 0

    @property
    def kept_indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.kept)

    def __len__(self) -> int:
        return len(self.kept)


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def prediction_formula(rm: RejectModel, klass: int) -> PredictionFormula:
    """Atoms whose conjunction holds exactly where the model outputs klass."""
    w, b = rm.model.weights, rm.model.bias
    if klass == 0:
        atoms = (
            LinearAtom(w, b, "<=", rm.t_plus),
            LinearAtom(w, b, ">=", rm.t_minus),
        )
    elif klass == 1:
        atoms = (LinearAtom(w, b, ">", rm.t_plus),)
    elif klass == -1:
        atoms = (LinearAtom(w, b, "<", rm.t_minus),)
    else:
        raise ValueError("class must be -1, 0 or +1")
    return PredictionFormula(atoms, klass)


def negate(formula: PredictionFormula) -> NegatedFormula:
    """De Morgan: negate every atom, conjunction becomes disjunction."""
    return NegatedFormula(tuple(atom.negated() for atom in formula.atoms))


def entails(pa: PartialAssignment, space: FeatureSpace, formula: PredictionFormula,
            counter: QueryCounter | None = None) -> EntailmentResult:
    """True iff every completion of the assignment gets class formula.klass.

    Decided by refuting the negation: the assignment entails the formula iff
    each disjunct of the negated formula is unsatisfiable over the box.  A
    satisfiable disjunct yields a witness point with a different prediction.
    """
    for atom in negate(formula).atoms:
        result = satisfiable(atom, pa, space, counter)
        if result:
            return EntailmentResult(False, result.witness)
    return EntailmentResult(True)


def minimal_explanation(rm: RejectModel, space: FeatureSpace, x: np.ndarray,
                        order=None) -> Explanation:
    """Drop features one at a time, keeping those whose removal breaks entailment.

    Iterates in ``order`` (default: ascending index).  The result is
    subset-minimal by construction: a dropped feature stays droppable when
    later drops only free more coordinates, and every kept feature carries a
    witness completion that flips the prediction.
    """
    x = space.check_instance(x)
    n = len(space)
    if order is None:
        order = range(n)
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the feature indices")

    klass = predict_with_reject(rm, x)
    formula = prediction_formula(rm, klass)
    neg_atoms = negate(formula).atoms
    counter = QueryCounter()

    start = time.perf_counter()
    fixed = {i: float(x[i]) for i in range(n)}
    certificates: dict[int, np.ndarray] = {}
    for i in order:
        value = fixed.pop(i)
        pa = PartialAssignment(fixed)
        witness = None
        for atom in neg_atoms:
            result = satisfiable(atom, pa, space, counter)
            if result:
                witness = result.witness
                break
        if witness is not None:
            fixed[i] = value
            certificates[i] = witness
    elapsed = time.perf_counter() - start

    kept = tuple(sorted((i, v) for i, v in fixed.items()))
    removed = tuple(sorted(set(range(n)) - set(fixed)))
    return Explanation(
        instance=x,
        klass=klass,
        kept=kept,
        removed=removed,
        certificates=certificates,
        time_seconds=elapsed,
        queries=counter.count,
        knife_edge_queries=counter.knife_edges,
    )


def verify_explanation(rm: RejectModel, space: FeatureSpace, expl: Explanation) -> VerificationReport:
    """Re-check sufficiency, minimality and certificate class flips.

    (a) fixing the kept values entails the explained class, (b) dropping any
    single kept feature no longer does, (c) every certificate point is
    predicted as a different class.
    """
    violations: list[str] = []
    n = len(space)
    kept_idx = set(expl.kept_indices)
    if kept_idx | set(expl.removed) != set(range(n)) or kept_idx & set(expl.removed):
        violations.append("kept and removed do not partition the features")

    formula = prediction_formula(rm, expl.klass)
    kept_pa = PartialAssignment({i: v for i, v in expl.kept})
    if not entails(kept_pa, space, formula):
        violations.append("sufficiency: kept features do not entail the class")
    for i, _ in expl.kept:
        if entails(kept_pa.without(i), space, formula):
            violations.append(f"minimality: feature {space.names[i]!r} is droppable")
    for i, witness in expl.certificates.items():
        if predict_with_reject(rm, witness) == expl.klass:
            violations.append(
                f"certificate for feature {space.names[i]!r} does not flip the class"
            )
    return VerificationReport(not violations, tuple(violations))


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Per-class counts of how often each feature stays in an explanation."""

    counts: dict[int, np.ndarray]
    patterns: dict[int, int]
    n_features: int

    def to_json(self, feature_names=None) -> dict:
        names = list(feature_names) if feature_names is not None else [
            f"f{i + 1}" for i in range(self.n_features)
        ]
        return {
            "classes": {
                str(klass): {
                    "counts": dict(zip(names, self.counts[klass].tolist())),
                    "patterns": self.patterns[klass],
                }
                for klass in sorted(self.counts)
            }
        }

    def format_text(self, feature_names=None) -> str:
        names = list(feature_names) if feature_names is not None else [
            f"f{i + 1}" for i in range(self.n_features)
        ]
        label = {-1: "negative", 0: "rejected", 1: "positive"}
        headers = ["class", *names, "patterns"]
        rows = []
        for klass in sorted(self.counts):
            rows.append([
                label[klass],
                *(str(int(c)) for c in self.counts[klass]),
                str(self.patterns[klass]),
            ])
        widths = [
            max(len(headers[c]), *(len(r[c]) for r in rows)) if rows else len(headers[c])
            for c in range(len(headers))
        ]
        lines = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
        for r in rows:
            lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
        return "\n".join(lines)


def feature_frequency(explanations) -> FrequencyTable:
    """Count, per predicted class, how many explanations keep each feature."""
    explanations = list(explanations)
    if not explanations:
        return FrequencyTable({}, {}, 0)
    n = len(explanations[0].instance)
    counts: dict[int, np.ndarray] = {}
    patterns: dict[int, int] = {}
    for expl in explanations:
        if len(expl.instance) != n:
            raise ValueError("explanations span different feature spaces")
        row = counts.setdefault(expl.klass, np.zeros(n, dtype=int))
        for i, _ in expl.kept:
            row[i] += 1
        patterns[expl.klass] = patterns.get(expl.klass, 0) + 1
    return FrequencyTable(counts, patterns, n)
