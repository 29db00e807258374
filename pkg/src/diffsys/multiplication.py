"""Canonical multiplication maps and the rank criteria built on them.

The central object is the bilinear multiplication of holomorphic
differentials into quadratic differentials, restricted to a chosen subspace
W of the weight-1 space.  Everything downstream is a rank statement about
its matrix:

* full domain surjectivity check (Max Noether dichotomy),
* randomized scans over small-integer subspaces W,
* the injectivity criterion for a differential system, evaluated through
  the span of its contraction image.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .curves import (
    DifferentialBasis,
    canonical_basis,
    combine,
    curve_to_json,
    express_in_basis,
    multiply,
    quadratic_basis,
)
from .field import ExactMatrix, ExactScalar, ZERO, ONE, exact_rank

__all__ = [
    "SubspaceSelection",
    "MultiplicationMatrix",
    "NoetherVerdict",
    "ScanReport",
    "CriterionVerdict",
    "theta_matrix",
    "noether_check",
    "lazarsfeld_scan",
    "criterion_injective",
    "exact_row_basis",
]


@dataclass(frozen=True)
class SubspaceSelection:
    """A subspace of the weight-1 space, spanned by exact coordinate vectors."""

    ambient: DifferentialBasis
    generators: tuple  # tuple of coordinate tuples over the ambient basis

    def __post_init__(self):
        g = len(self.ambient)
        if any(len(v) != g for v in self.generators):
            raise ValueError("generator length does not match ambient basis")
        if self.generators:
            mat = ExactMatrix.from_rows(self.generators)
            if exact_rank(mat) != len(self.generators):
                raise ValueError("dependent generators in subspace selection")

    @property
    def dimension(self) -> int:
        return len(self.generators)

    def to_json(self):
        return [[c.to_json() for c in v] for v in self.generators]


@dataclass(frozen=True)
class MultiplicationMatrix:
    """Matrix of the multiplication map on H0(K) (x) W, with exact rank.

    Rows follow the weight-2 basis order; column ``i * dim W + j`` is the
    product of weight-1 basis element ``i`` with W generator ``j``.
    """

    curve: object
    domain_description: str
    matrix: ExactMatrix
    rank: int

    @property
    def corank(self) -> int:
        return self.matrix.rows - self.rank

    def to_json(self):
        return {
            "curve": curve_to_json(self.curve),
            "domain": self.domain_description,
            "rows": self.matrix.rows,
            "cols": self.matrix.cols,
            "rank": self.rank,
        }


def theta_matrix(curve, w: SubspaceSelection) -> MultiplicationMatrix:
    """Multiplication restricted to H0(K) (x) W, with exact rank certificate."""
    basis1 = w.ambient
    basis2 = quadratic_basis(curve)
    w_elements = [combine(basis1, coords) for coords in w.generators]
    columns = []
    for el in basis1.elements:
        for wel in w_elements:
            prod = multiply(el, wel, curve)
            columns.append(express_in_basis(prod.numerator, prod.denom_class, basis2))
    nrows = len(basis2)
    ncols = len(columns)
    entries = tuple(columns[c][r] for r in range(nrows) for c in range(ncols))
    mat = ExactMatrix(nrows, ncols, entries)
    desc = (
        "full H0(K) (x) H0(K)"
        if w.dimension == len(basis1)
        else f"H0(K) (x) W, dim W = {w.dimension}"
    )
    return MultiplicationMatrix(curve, desc, mat, exact_rank(mat))


def full_subspace(curve) -> SubspaceSelection:
    basis = canonical_basis(curve)
    g = len(basis)
    gens = tuple(
        tuple(ONE if i == j else ZERO for j in range(g)) for i in range(g)
    )
    return SubspaceSelection(basis, gens)


@dataclass(frozen=True)
class NoetherVerdict:
    surjective: bool
    rank: int
    corank: int

    def to_json(self):
        return {
            "verdict": "surjective" if self.surjective else "not_surjective",
            "rank": self.rank,
            "corank": self.corank,
        }


def noether_check(curve) -> NoetherVerdict:
    """Surjectivity verdict for multiplication on the full domain."""
    theta = theta_matrix(curve, full_subspace(curve))
    target = 3 * curve.genus - 3
    return NoetherVerdict(theta.rank == target, theta.rank, target - theta.rank)


@dataclass(frozen=True)
class ScanReport:
    curve: object
    trials: int
    w_dim: int
    seed: int
    successes: int
    failure_witnesses: tuple  # tuples (trial, generators-as-int-rows)
    all_witnesses: tuple = ()  # populated when the scan records every draw

    def to_json(self):
        return {
            "curve": curve_to_json(self.curve),
            "trials": self.trials,
            "w_dim": self.w_dim,
            "seed": self.seed,
            "successes": self.successes,
            "failures": [
                {"trial": t, "generators": [list(map(int, row)) for row in gens]}
                for t, gens in self.failure_witnesses
            ],
        }


def _draw_subspace(basis, w_dim, rng, bound=10, max_tries=200):
    g = len(basis)
    for _ in range(max_tries):
        rows = [
            [rng.randint(-bound, bound) for _ in range(g)] for _ in range(w_dim)
        ]
        gens = tuple(tuple(ExactScalar.of(v) for v in row) for row in rows)
        if exact_rank(ExactMatrix.from_rows(gens)) == w_dim:
            return rows, SubspaceSelection(basis, gens)
    raise RuntimeError("failed to draw an independent random subspace")


def lazarsfeld_scan(
    curve,
    trials: int,
    w_dim: int = 3,
    seed: int = 0,
    store_all: bool = False,
    threads: int = 1,
) -> ScanReport:
    """Randomized surjectivity scan over ``trials`` seeded subspaces W.

    Coordinates are integers in [-10, 10] from per-trial generators derived
    from the master seed, so single trials replay independently and may run
    on a thread pool (aggregation is by trial index, order-independent).
    Failures are recorded with their W; genericity means they are expected
    never on non-hyperelliptic targets and always on hyperelliptic ones of
    genus >= 3.  With ``store_all`` every drawn W is kept (with its rank)
    for replay and cross-checking, not only the failures.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    g = curve.genus
    if w_dim < 1 or w_dim > g:
        raise ValueError(f"w_dim must lie in 1..{g}")
    basis = canonical_basis(curve)
    target = 3 * g - 3

    def run_trial(t):
        rng = random.Random(f"{seed}:{t}")
        rows, w = _draw_subspace(basis, w_dim, rng)
        return rows, theta_matrix(curve, w).rank

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_trial, range(trials)))
    else:
        outcomes = [run_trial(t) for t in range(trials)]

    successes = 0
    failures = []
    everything = []
    for t, (rows, rank) in enumerate(outcomes):
        if rank == target:
            successes += 1
        else:
            failures.append((t, tuple(tuple(r) for r in rows)))
        if store_all:
            everything.append((t, tuple(tuple(r) for r in rows), rank))
    return ScanReport(
        curve, trials, w_dim, seed, successes, tuple(failures), tuple(everything)
    )


@dataclass(frozen=True)
class CriterionVerdict:
    holds: bool
    v_dimension: int
    theta_v_rank: int

    def to_json(self):
        return {
            "verdict": "holds" if self.holds else "fails",
            "V_dimension": self.v_dimension,
            "theta_V_rank": self.theta_v_rank,
        }


def exact_row_basis(vectors) -> list:
    """A maximal exactly-independent subset of the given coordinate vectors."""
    chosen = []
    rank = 0
    for v in vectors:
        if all(c.is_zero() for c in v):
            continue
        candidate = chosen + [tuple(v)]
        if exact_rank(ExactMatrix.from_rows(candidate)) > rank:
            chosen = candidate
            rank += 1
    return chosen


def criterion_injective(curve, system) -> CriterionVerdict:
    """Injectivity criterion for a differential system, via its span V.

    V is the row span of the coefficient matrix inside the weight-1 space;
    the verdict holds exactly when multiplication restricted to H0(K) (x) V
    surjects onto the quadratic differentials.  The verdict carries both
    dim V and the achieved rank so hyperelliptic obstructions and
    too-small-V failures stay distinguishable.
    """
    if system.curve != curve:
        raise ValueError("system is attached to a different curve")
    coeff = system.coefficients
    rows = [coeff.row(i) for i in range(coeff.rows)]
    v_basis = exact_row_basis(rows)
    if not v_basis:
        return CriterionVerdict(False, 0, 0)
    basis = canonical_basis(curve)
    w = SubspaceSelection(basis, tuple(v_basis))
    theta = theta_matrix(curve, w)
    target = 3 * curve.genus - 3
    return CriterionVerdict(theta.rank == target, w.dimension, theta.rank)
