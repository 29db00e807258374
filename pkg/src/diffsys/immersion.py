"""Finite-difference rank estimation for the monodromy map.

Local coordinates on the space of (curve, system) pairs are explicit slices,
never quotients:

* Teichmueller directions move branch points; the first two branch points
  are pinned at 0 and 1 (with the odd-model point at infinity fixing the
  third normalization), leaving 2g-1 moving complex parameters;
* constant-gauge directions are killed by freezing three designated sl2
  coefficient entries (the E- and F-components on the first differential
  and the H-component on the second) at their center values, after checking
  exactly that the adjoint action is transverse to this slice.

For genus 2 the free complex parameter count is 3 + 3 = 6, matching the
dimension of the system space.  For hyperelliptic genus >= 3 the branch
moves span only the hyperelliptic locus (2g-1 of 3g-3 directions) and the
exact injectivity criterion never holds on such curves, so those runs are
labeled exploratory and carry no pass/fail meaning.

The loop system is frozen across all perturbations of one experiment, and
perturbation radii are capped well below the loop clearance, so every
perturbed monodromy is computed along literally identical polylines.

All complex parameters and traces are split into real and imaginary parts.
The map is holomorphic, so the real Jacobian has even rank and paired
singular values; reports state the complex rank (real rank / 2) and record
whether evenness held.  When the estimated rank equals the full dimension
there is no trailing singular value to form a gap against, so the gap ratio
is taken against the detection floor ``rank_rel_floor * sigma_1``.

Branch directions and coefficient directions carry very different natural
units, which skews raw singular values without changing the rank.  Before
the gap analysis the Jacobian is therefore equilibrated: the two real
columns of each complex parameter share one normalizing factor, as do the
two real rows of each trace, which is a diffeomorphic change of chart on
either side and keeps the paired structure intact.  The raw spectrum is
reported alongside.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curves import HyperellipticCurve, curve_to_json
from .field import ExactMatrix, ExactScalar, FloatMatrix, numeric_rank
from .multiplication import CriterionVerdict, criterion_injective
from .monodromy import (
    IntegrationError,
    IrreducibilityVerdict,
    LoopSystem,
    MonodromyRepresentation,
    NumericSL2System,
    build_loops,
    irreducibility_probe,
    monodromy,
    standard_word_list,
    trace_vector,
)
from .systems import DifferentialSystem, builtin_algebra, sample_system, scale_system, system_to_json

__all__ = [
    "GAUGE_FROZEN_ENTRIES",
    "SystCoordinates",
    "ImmersionReport",
    "LadderReport",
    "make_center",
    "gauge_slice_regular",
    "immersion_experiment",
    "fd_step_ladder",
]

# frozen (row, col) entries of the 3 x g sl2 coefficient matrix, rows = (H, E, F)
GAUGE_FROZEN_ENTRIES = ((1, 0), (2, 0), (0, 1))


def gauge_slice_regular(system: DifferentialSystem) -> bool:
    """Exact transversality of the adjoint action to the frozen-entry slice."""
    lie = system.lie
    coeff = system.coefficients
    basis = [
        tuple(ExactScalar.of(1 if i == j else 0) for j in range(3)) for i in range(3)
    ]
    rows = []
    for row_idx, col_idx in GAUGE_FROZEN_ENTRIES:
        column = tuple(coeff.get(r, col_idx) for r in range(3))
        rows.append(
            tuple(lie.bracket(xi, column)[row_idx] for xi in basis)
        )
    from .field import exact_rank

    return exact_rank(ExactMatrix.from_rows(rows)) == 3


@dataclass(frozen=True)
class SystCoordinates:
    """A center point of the system space with its frozen chart data.

    ``allow_singular_gauge_slice`` admits centers where the adjoint action is
    not transverse to the frozen entries (e.g. the zero system); such runs
    are exploratory by nature and the flag is recorded in the report config.
    """

    curve: HyperellipticCurve
    system: DifferentialSystem
    loops: LoopSystem
    clearance: float
    allow_singular_gauge_slice: bool = False

    def __post_init__(self):
        if not isinstance(self.curve, HyperellipticCurve) or not self.curve.odd_model:
            raise ValueError("immersion centers use odd-model hyperelliptic curves")
        pts = self.curve.branch_points
        if not (pts[0] - ExactScalar.of(0)).is_zero() or not (
            pts[1] - ExactScalar.of(1)
        ).is_zero():
            raise ValueError("center curve must be normalized with branch points 0 and 1")
        if self.system.lie.name != "sl2":
            raise ValueError("immersion experiments support sl2 systems only")
        if self.system.curve != self.curve:
            raise ValueError("system is attached to a different curve")
        if not self.allow_singular_gauge_slice and not gauge_slice_regular(self.system):
            raise ValueError(
                "gauge slice is singular at this center; resample the system"
            )

    @property
    def genus(self) -> int:
        return self.curve.genus

    def parameter_labels(self) -> list:
        g = self.genus
        labels = [("branch", k) for k in range(2, 2 * g + 1)]
        labels += [
            ("coeff", (r, c))
            for r in range(3)
            for c in range(g)
            if (r, c) not in GAUGE_FROZEN_ENTRIES
        ]
        return labels

    @property
    def free_complex_count(self) -> int:
        return len(self.parameter_labels())

    def numeric(self) -> NumericSL2System:
        return NumericSL2System.from_system(self.system)

    def to_json(self):
        return {
            "curve": curve_to_json(self.curve),
            "system": system_to_json(self.system),
            "clearance": self.clearance,
            "frozen_entries": [list(e) for e in GAUGE_FROZEN_ENTRIES],
            "free_complex_parameters": self.free_complex_count,
            "allow_singular_gauge_slice": self.allow_singular_gauge_slice,
        }


def make_center(
    seed: int,
    branch=(0, 1, 2, 3, 4),
    coefficient_bound: int = 5,
    scale: Fraction = Fraction(1, 8),
    clearance: float = 0.22,
    require_criterion: bool = False,
    max_tries: int = 64,
) -> SystCoordinates:
    """Seeded center with a regular gauge slice (resampling until regular).

    ``scale`` multiplies the sampled integer coefficients; small scales keep
    monodromy matrices moderate, which the finite-difference noise floor
    rewards.  With ``require_criterion`` the sampled system must also pass
    the exact injectivity criterion.
    """
    curve = HyperellipticCurve.from_integers(branch)
    lie = builtin_algebra("sl2")
    factor = ExactScalar.of(scale)
    loops = build_loops(curve, clearance)
    for k in range(max_tries):
        system = scale_system(
            sample_system(curve, lie, seed=seed + 7919 * k, coefficient_bound=coefficient_bound),
            factor,
        )
        if not gauge_slice_regular(system):
            continue
        if require_criterion and not criterion_injective(curve, system).holds:
            continue
        return SystCoordinates(curve, system, loops, clearance)
    raise RuntimeError("failed to sample a regular center")


@dataclass(frozen=True)
class ImmersionReport:
    jacobian: FloatMatrix
    singular_values: tuple  # equilibrated spectrum used for the rank decision
    raw_singular_values: tuple
    estimated_rank: int  # complex rank = real rank / 2
    real_rank: int
    rank_even: bool
    gap_ratio: float
    fd_steps_used: tuple
    criterion_verdict: CriterionVerdict
    irreducibility: IrreducibilityVerdict
    center_rep: MonodromyRepresentation
    status: str  # "ok" | "out_of_hypothesis" | "exploratory"
    per_block_column_norms: dict
    words: tuple

    def to_json(self):
        return {
            "singular_values": list(self.singular_values),
            "raw_singular_values": list(self.raw_singular_values),
            "estimated_rank": self.estimated_rank,
            "real_rank": self.real_rank,
            "rank_even": self.rank_even,
            "gap_ratio": self.gap_ratio,
            "fd_steps_used": list(self.fd_steps_used),
            "criterion": self.criterion_verdict.to_json(),
            "irreducibility": self.irreducibility.to_json(),
            "relation_residual": self.center_rep.relation_residual,
            "status": self.status,
            "per_block_column_norms": self.per_block_column_norms,
            "words": ["*".join(w) for w in self.words],
        }


def _perturbed(base: NumericSL2System, label, delta: complex) -> NumericSL2System:
    kind, where = label
    if kind == "branch":
        roots = list(base.roots)
        roots[where] = roots[where] + delta
        return NumericSL2System(tuple(roots), base.h_poly, base.e_poly, base.f_poly)
    r, c = where
    polys = [list(base.h_poly), list(base.e_poly), list(base.f_poly)]
    polys[r][c] = polys[r][c] + delta
    return NumericSL2System(base.roots, tuple(polys[0]), tuple(polys[1]), tuple(polys[2]))


def _trace_values(nsys, loops, ode_tol, words):
    # perturbed evaluations only need trace accuracy; validity gates for the
    # center itself use the strict defaults in the caller
    rep = monodromy(None, nsys, loops, ode_tol, relation_tol=1e-6, det_tol=1e-8)
    return np.array(trace_vector(rep, words).values, dtype=complex)


def _gap_rank(sigma, floor_rel):
    """(real_rank, gap_ratio) by the documented gap rule over the spectrum."""
    if not sigma or sigma[0] == 0.0:
        return 0, 0.0
    s1 = sigma[0]
    floor = floor_rel * s1
    best_r, best_ratio = 0, 0.0
    m = len(sigma)
    for r in range(1, m + 1):
        if sigma[r - 1] <= floor:
            break
        nxt = sigma[r] if r < m else floor
        ratio = sigma[r - 1] / max(nxt, 1e-300)
        if ratio > best_ratio:
            best_r, best_ratio = r, ratio
    return best_r, best_ratio


def _equilibrate(jac: np.ndarray) -> np.ndarray:
    """Unit-scale the column pair of each complex parameter and the row pair
    of each trace coordinate (rank-preserving, keeps sigma pairing)."""
    out = jac.copy()
    for k in range(out.shape[1] // 2):
        n = np.linalg.norm(out[:, 2 * k : 2 * k + 2])
        if n > 0:
            out[:, 2 * k : 2 * k + 2] /= n
    for k in range(out.shape[0] // 2):
        n = np.linalg.norm(out[2 * k : 2 * k + 2, :])
        if n > 0:
            out[2 * k : 2 * k + 2, :] /= n
    return out


def immersion_experiment(
    center: SystCoordinates,
    fd_step: float,
    ode_tol: float = 1e-12,
    words=None,
    rank_rel_floor: float = 1e-6,
    threads: int = 1,
) -> ImmersionReport:
    """Central finite differences of the trace chart at one center.

    Aborts when a perturbed curve would collide branch points or break the
    frozen-loop validity radius; the offending direction is named in the
    error.  One column per real coordinate; columns are independent
    monodromy computations and may run on a thread pool.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    if fd_step > center.clearance / 4:
        raise ValueError(
            f"fd_step {fd_step} exceeds a quarter of the loop clearance {center.clearance}"
        )
    g = center.genus
    if words is None:
        words = standard_word_list(g)
    labels = center.parameter_labels()
    base = center.numeric()

    # hypothesis gates at the center
    verdict = criterion_injective(center.curve, center.system)
    center_rep = monodromy(None, base, center.loops, ode_tol)
    probe = irreducibility_probe(center_rep)
    if g >= 3:
        status = "exploratory"
    elif not probe.probably_irreducible or not verdict.holds:
        status = "out_of_hypothesis"
    else:
        status = "ok"

    # guard against branch collisions for every probed direction
    for kind, where in labels:
        if kind != "branch":
            continue
        roots = list(base.roots)
        for other in roots[:where] + roots[where + 1 :]:
            if abs(roots[where] - other) <= 2 * fd_step:
                raise ValueError(
                    f"fd_step {fd_step} would collide branch point {where} with a neighbour"
                )

    directions = []
    for label in labels:
        directions.append((label, fd_step + 0j))
        directions.append((label, fd_step * 1j))

    def column(direction):
        label, delta = direction
        try:
            tp = _trace_values(_perturbed(base, label, +delta), center.loops, ode_tol, words)
            tm = _trace_values(_perturbed(base, label, -delta), center.loops, ode_tol, words)
        except (IntegrationError, ValueError) as err:
            raise IntegrationError(
                f"finite-difference direction {label} (step {delta}) failed: {err}"
            ) from err
        return (tp - tm) / (2 * fd_step)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, directions))
    else:
        cols = [column(d) for d in directions]

    jac = np.zeros((2 * len(words), 2 * len(labels)), dtype=float)
    for j, col in enumerate(cols):
        jac[0::2, j] = col.real
        jac[1::2, j] = col.imag

    fm = FloatMatrix.from_numpy(jac.astype(complex))
    _, raw_sigma = numeric_rank(fm, rel_tol=rank_rel_floor)
    _, sigma = numeric_rank(
        FloatMatrix.from_numpy(_equilibrate(jac).astype(complex)), rel_tol=rank_rel_floor
    )
    real_rank, gap_ratio = _gap_rank(sigma, rank_rel_floor)
    even = real_rank % 2 == 0

    nbranch = 2 * (2 * g - 1)
    col_norms = np.linalg.norm(jac, axis=0)
    blocks = {
        "branch": [float(x) for x in col_norms[:nbranch]],
        "coeff": [float(x) for x in col_norms[nbranch:]],
    }
    return ImmersionReport(
        jacobian=fm,
        singular_values=tuple(float(s) for s in sigma),
        raw_singular_values=tuple(float(s) for s in raw_sigma),
        estimated_rank=real_rank // 2,
        real_rank=real_rank,
        rank_even=even,
        gap_ratio=float(gap_ratio),
        fd_steps_used=(fd_step,),
        criterion_verdict=verdict,
        irreducibility=probe,
        center_rep=center_rep,
        status=status,
        per_block_column_norms=blocks,
        words=tuple(tuple(w) for w in words),
    )


@dataclass(frozen=True)
class LadderReport:
    steps: tuple
    reports: tuple
    ranks: tuple
    rank_stable: bool
    max_sigma_relative_deviation: float

    def to_json(self):
        return {
            "steps": list(self.steps),
            "ranks": list(self.ranks),
            "rank_stable": self.rank_stable,
            "max_sigma_relative_deviation": self.max_sigma_relative_deviation,
            "reports": [r.to_json() for r in self.reports],
        }


def fd_step_ladder(center: SystCoordinates, steps, ode_tol: float = 1e-12, **kw) -> LadderReport:
    """Run the experiment at every step of a ladder and compare spectra.

    Needs at least three steps spanning at least two orders of magnitude;
    rank agreement across the ladder is the stability acceptance bar.
    """
    steps = tuple(float(s) for s in steps)
    if len(steps) < 3:
        raise ValueError("fd ladder needs at least 3 steps")
    if max(steps) / min(steps) < 99.999:
        raise ValueError("fd ladder must span at least two orders of magnitude")
    reports = tuple(immersion_experiment(center, s, ode_tol, **kw) for s in steps)
    ranks = tuple(r.estimated_rank for r in reports)
    dev = 0.0
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            si = np.array(reports[i].singular_values)
            sj = np.array(reports[j].singular_values)
            n = min(len(si), len(sj))
            if n == 0:
                continue
            scale = max(si[0], sj[0], 1e-300)
            dev = max(dev, float(np.max(np.abs(si[:n] - sj[:n])) / scale))
    return LadderReport(steps, reports, ranks, len(set(ranks)) == 1, dev)
