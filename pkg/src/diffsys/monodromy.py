"""Numerical monodromy of rank-2 differential systems on hyperelliptic curves.

Loops
-----
``build_loops`` realizes a canonical generating system a_1, b_1, ..., a_g, b_g
of the fundamental group, based below the branch locus.  Each generator is a
word in elementary "lollipop" loops around single branch points; the words
come from an exact presentation-level construction (prefix products of the
elementary loops with explicit conjugators) whose defining property is that

    [a_1, b_1] [a_2, b_2] ... [a_g, b_g] = 1     exactly in pi_1,

so the surface-group relation holds by construction, not by accident of
homology.  Each word has even length, hence lifts to a closed loop on the
double cover; the per-vertex sheet annotation is computed by continuous
continuation of sqrt(f).

Transport
---------
``integrate_loop`` solves dY = (sum_j B_j omega_j) Y along the lifted
polyline with an embedded adaptive Runge-Kutta 5(4) pair (Dormand-Prince
coefficients, PI step control).  The square root y = sqrt(f(x)) is continued
by choosing, at each accepted step, the root closer to the previous value;
acceptance additionally requires |y_new - y_old| < |y_old|, so a silent
sheet jump is impossible and failure surfaces as step-size underflow.

Convention: the stored monodromy matrix of a loop is the inverse of the
forward parallel transport, which turns loop concatenation into plain matrix
multiplication (a homomorphism, not an anti-homomorphism).  Traces, norms,
determinants and the surface relation are insensitive to everything except
word order, which this convention keeps left to right.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .curves import HyperellipticCurve
from .systems import DifferentialSystem

__all__ = [
    "ClearanceError",
    "IntegrationError",
    "Loop",
    "LoopSystem",
    "MonodromyRepresentation",
    "TraceVector",
    "IrreducibilityVerdict",
    "NumericSL2System",
    "canonical_words",
    "build_loops",
    "integrate_loop",
    "monodromy",
    "trace_vector",
    "standard_word_list",
    "irreducibility_probe",
]


class ClearanceError(ValueError):
    """The requested clearance is infeasible for the branch configuration."""


class IntegrationError(RuntimeError):
    """Adaptive stepping failed (step underflow or non-finite values)."""


# -- canonical generator words -------------------------------------------------


def _reduce(word):
    out = []
    for k in word:
        if out and out[-1] == k:
            out.pop()
        else:
            out.append(k)
    return tuple(out)


def _cat(*words):
    return _reduce([k for w in words for k in w])


def _inv(word):
    return tuple(reversed(word))


def _prefix_word(j):
    """Prefix product P_j of the elementary loops, as a reduced letter tuple."""
    if j == 0:
        return ()
    if j % 2 == 1:
        return tuple(range(1, j + 2))
    return tuple(range(1, j + 2)) + (1,)


def canonical_words(g: int) -> list:
    """Loop words [(natural name, letters)] in order a1, b1, ..., ag, bg.

    Letters are 1-based indices of branch points in sorted order; every
    letter is an involution upstairs, so words carry no signs.  The
    commutator product over handles in this order is exactly trivial.
    """
    xs = {1: _prefix_word(2)}
    ys = {1: _inv(_prefix_word(1))}
    bs = {}
    for j in range(2, g + 1):
        xs[j] = _inv(_prefix_word(2 * j - 1))
        ys[j] = _cat(_prefix_word(2 * j - 2), _inv(_prefix_word(2 * j)), _prefix_word(2 * j - 1))
        bs[j] = _cat(xs[j], ys[j])
    out = []
    handle = 0
    for j in range(g, 0, -1):
        handle += 1
        conj = ()
        for m in range(2, j):
            conj = _cat(conj, bs[m])
        out.append((f"a{handle}", _cat(conj, xs[j], _inv(conj))))
        out.append((f"b{handle}", _cat(conj, ys[j], _inv(conj))))
    return out


# -- loop geometry --------------------------------------------------------------

_CIRCLE_SIDES = 16
_SEC = 1.0 / math.cos(math.pi / _CIRCLE_SIDES)


@dataclass(frozen=True)
class Loop:
    name: str
    word: tuple
    vertices: tuple  # closed polyline, vertices[0] == vertices[-1] == base point
    sheets: tuple  # +-1 per vertex: sign of y against the principal sqrt

    def to_json(self):
        return {
            "name": self.name,
            "word": list(self.word),
            "vertices": [[v.real, v.imag] for v in self.vertices],
            "sheets": list(self.sheets),
        }


@dataclass(frozen=True)
class LoopSystem:
    base_point: complex
    clearance: float
    genus: int
    loops: tuple  # ordered a1, b1, ..., ag, bg

    def to_json(self):
        return {
            "base_point": [self.base_point.real, self.base_point.imag],
            "clearance": self.clearance,
            "genus": self.genus,
            "loops": [l.to_json() for l in self.loops],
        }


def _f_of(roots):
    def f(x):
        acc = 1.0 + 0.0j
        for r in roots:
            acc *= x - r
        return acc

    return f


def _track_sqrt(f, start_y, points, max_chunk=0.2):
    """Continue y = sqrt(f) along a polyline by dense stepping; returns y values
    at the given points.  Steps are subdivided until each y increment is small."""
    y = start_y
    values = [y]
    for a, b in zip(points, points[1:]):
        n = max(2, int(abs(b - a) / max_chunk) + 1)
        k = 0
        while True:
            ok = True
            yy = y
            for m in range(1, n + 1):
                x = a + (b - a) * m / n
                w = cmath.sqrt(f(x))
                cand = w if abs(w - yy) <= abs(-w - yy) else -w
                if abs(cand - yy) >= 0.9 * abs(yy):
                    ok = False
                    break
                yy = cand
            if ok:
                y = yy
                break
            n *= 2
            k += 1
            if k > 24:
                raise IntegrationError("square-root continuation failed to resolve")
        values.append(y)
    return values


def build_loops(curve: HyperellipticCurve, clearance: float) -> LoopSystem:
    """Canonical loop system for an odd-model hyperelliptic curve.

    Requires branch points pairwise separated by more than twice the
    clearance; every polyline vertex keeps at least the clearance from every
    branch point, and this is re-validated on the final geometry.
    """
    if not isinstance(curve, HyperellipticCurve):
        raise ValueError("loops are defined for hyperelliptic curves only")
    if not curve.odd_model:
        raise ValueError("loop construction expects the odd-degree model")
    if clearance <= 0:
        raise ValueError("clearance must be positive")
    g = curve.genus
    roots = sorted(curve.float_roots(), key=lambda z: (z.real, z.imag))
    n = len(roots)
    min_sep = min(
        abs(roots[i] - roots[j]) for i in range(n) for j in range(i + 1, n)
    )
    if min_sep <= 2 * clearance:
        raise ClearanceError(
            f"branch separation {min_sep:.4g} is not greater than twice the clearance {clearance:.4g}"
        )
    radii = []
    for k, r in enumerate(roots):
        sep_k = min(abs(r - s) for i, s in enumerate(roots) if i != k)
        rad = min(0.45 * sep_k, 3.0 * clearance)
        if rad < clearance * _SEC:
            raise ClearanceError(
                "clearance infeasible: no circle radius fits between the clearance "
                f"ring and the neighbours of branch point {k}"
            )
        radii.append(rad)
    res = [r.real for r in roots]
    ims = [r.imag for r in roots]
    spread = max(max(res) - min(res), 1.0)
    depth = max(3.0 * clearance, 0.12 * spread, 0.4)
    y_low = min(ims) - depth
    base = complex(0.5 * (max(res) + min(res)), y_low)

    def lollipop(k):
        lam, rad = roots[k - 1], radii[k - 1]
        foot = complex(lam.real, y_low)
        south = lam + rad * cmath.exp(-0.5j * math.pi)
        circle = [
            lam + rad * cmath.exp(1j * (-0.5 * math.pi + 2 * math.pi * m / _CIRCLE_SIDES))
            for m in range(_CIRCLE_SIDES + 1)
        ]
        return [base, foot, south] + circle[1:] + [foot, base]

    f = _f_of(roots)
    y0 = cmath.sqrt(f(base))
    words = canonical_words(g)
    loops = []
    for name, word in words:
        vertices = [base]
        for letter in word:
            piece = lollipop(letter)
            vertices.extend(piece[1:])
        vertices = _dedupe(vertices)
        _validate_clearance(vertices, roots, clearance)
        ys = _track_sqrt(f, y0, vertices)
        principal = [cmath.sqrt(f(v)) for v in vertices]
        sheets = tuple(
            1 if abs(y - p) <= abs(y + p) else -1 for y, p in zip(ys, principal)
        )
        if abs(ys[-1] - y0) > 0.5 * abs(y0):
            raise IntegrationError(f"loop {name} does not close on its starting sheet")
        loops.append(Loop(name, word, tuple(vertices), sheets))
    return LoopSystem(base, clearance, g, tuple(loops))


def _dedupe(vertices, eps=1e-13):
    out = [vertices[0]]
    for v in vertices[1:]:
        if abs(v - out[-1]) > eps:
            out.append(v)
    return out


def _validate_clearance(vertices, roots, clearance):
    for v in vertices:
        for r in roots:
            if abs(v - r) < clearance * (1 - 1e-9):
                raise ClearanceError(
                    f"polyline vertex {v:.4g} is within clearance of branch point {r:.4g}"
                )
    for a, b in zip(vertices, vertices[1:]):
        d = b - a
        L2 = d.real * d.real + d.imag * d.imag
        if L2 == 0:
            continue
        for r in roots:
            t = ((r - a).real * d.real + (r - a).imag * d.imag) / L2
            t = min(1.0, max(0.0, t))
            if abs(a + t * d - r) < 0.9 * clearance:
                raise ClearanceError(
                    f"polyline segment passes within clearance of branch point {r:.4g}"
                )


# -- numeric system -------------------------------------------------------------


@dataclass(frozen=True)
class NumericSL2System:
    """Float view of an sl2 system: branch roots and H/E/F coefficient polys."""

    roots: tuple  # 2g+1 complex branch points
    h_poly: tuple  # ascending coefficients of the H-component polynomial
    e_poly: tuple
    f_poly: tuple

    @staticmethod
    def from_system(system: DifferentialSystem) -> "NumericSL2System":
        if system.lie.name != "sl2" or system.lie.dimension != 3:
            raise ValueError("monodromy integration supports sl2 systems only")
        curve = system.curve
        if not isinstance(curve, HyperellipticCurve):
            raise ValueError("monodromy integration supports hyperelliptic curves only")
        coeff = system.coefficients
        g = curve.genus
        rows = [tuple(e.to_complex() for e in coeff.row(j)) for j in range(3)]
        return NumericSL2System(
            tuple(curve.float_roots()), rows[0][:g], rows[1][:g], rows[2][:g]
        )


def _coerce(system) -> NumericSL2System:
    if isinstance(system, NumericSL2System):
        return system
    return NumericSL2System.from_system(system)


# -- Dormand-Prince 5(4) transport ----------------------------------------------

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_MIN_STEP = 1e-13
_MAX_STEPS = 2_000_000


def _horner(coeffs, x):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def integrate_loop(curve, system, loop: Loop, ode_tol: float):
    """Parallel transport around one loop; returns the forward 2x2 transport.

    The connection form is (sum_i M_i x^i) dx / y with M_i the trace-free
    coefficient matrices of the system; y is continued along the path.  Local
    error per step is held at ``ode_tol`` (mixed absolute/relative, embedded
    4th-order estimate), with PI step-size control and the sheet-guard
    acceptance test.
    """
    if ode_tol <= 0:
        raise ValueError("ode_tol must be positive")
    # branch data lives in the numeric system; the curve argument exists for
    # interface symmetry and may be None when a NumericSL2System is passed
    nsys = _coerce(system)
    roots = nsys.roots
    ha, he, hf = nsys.h_poly, nsys.e_poly, nsys.f_poly

    def fval(x):
        acc = 1.0 + 0.0j
        for r in roots:
            acc *= x - r
        return acc

    y11, y12, y21, y22 = 1 + 0j, 0j, 0j, 1 + 0j
    verts = loop.vertices
    f0 = fval(verts[0])
    y_ref = cmath.sqrt(f0)
    if loop.sheets[0] < 0:
        y_ref = -y_ref

    atol = rtol = ode_tol
    h = 0.01
    err_prev = 1.0
    nsteps = 0
    prev_len = None

    for v, w in zip(verts, verts[1:]):
        delta = w - v
        seg_len = abs(delta)
        if seg_len == 0:
            continue
        if prev_len is not None:
            h *= prev_len / seg_len
        prev_len = seg_len
        t = 0.0
        h = min(max(h, 1e-6), 1.0)
        k1 = None

        def rhs(tau, a11, a12, a21, a22, yr):
            x = v + delta * tau
            fx = fval(x)
            yy = cmath.sqrt(fx)
            if abs(yy - yr) > abs(-yy - yr):
                yy = -yy
            s = delta / yy
            pa = _horner(ha, x) * s
            pb = _horner(he, x) * s
            pc = _horner(hf, x) * s
            return (
                pa * a11 + pb * a21,
                pa * a12 + pb * a22,
                pc * a11 - pa * a21,
                pc * a12 - pa * a22,
                yy,
            )

        while t < 1.0:
            if 1.0 - t < 1e-13:
                break  # float residue of the parameter interval, below tolerance
            if nsteps > _MAX_STEPS:
                raise IntegrationError("step budget exhausted")
            h = min(h, 1.0 - t)
            if h < _MIN_STEP:
                raise IntegrationError(
                    f"step-size underflow on loop {loop.name} (path too close to a branch point?)"
                )

            if k1 is None:
                k1 = rhs(t, y11, y12, y21, y22, y_ref)
            ks = [k1]
            for i in range(1, 7):
                arow = _A[i]
                s11 = s12 = s21 = s22 = 0j
                for aij, k in zip(arow, ks):
                    s11 += aij * k[0]
                    s12 += aij * k[1]
                    s21 += aij * k[2]
                    s22 += aij * k[3]
                ks.append(
                    rhs(
                        t + _C[i] * h,
                        y11 + h * s11,
                        y12 + h * s12,
                        y21 + h * s21,
                        y22 + h * s22,
                        y_ref,
                    )
                )
            # 5th-order solution values were assembled in stage 7's state:
            a7 = _A[6]
            n11 = y11 + h * sum(aij * k[0] for aij, k in zip(a7, ks[:6]))
            n12 = y12 + h * sum(aij * k[1] for aij, k in zip(a7, ks[:6]))
            n21 = y21 + h * sum(aij * k[2] for aij, k in zip(a7, ks[:6]))
            n22 = y22 + h * sum(aij * k[3] for aij, k in zip(a7, ks[:6]))
            e11 = h * sum(ei * k[0] for ei, k in zip(_E, ks))
            e12 = h * sum(ei * k[1] for ei, k in zip(_E, ks))
            e21 = h * sum(ei * k[2] for ei, k in zip(_E, ks))
            e22 = h * sum(ei * k[3] for ei, k in zip(_E, ks))

            err = 0.0
            for ev, old, new in (
                (e11, y11, n11),
                (e12, y12, n12),
                (e21, y21, n21),
                (e22, y22, n22),
            ):
                sc = atol + rtol * max(abs(old), abs(new))
                err = max(err, abs(ev) / sc)
            if not math.isfinite(err):
                h *= 0.1
                k1 = None
                nsteps += 1
                continue

            y_new = ks[6][4]  # continuation value at t + h (stage 7 sits at t + h)
            sheet_ok = abs(y_new - y_ref) < abs(y_ref)

            if err <= 1.0 and sheet_ok:
                t += h
                y11, y12, y21, y22 = n11, n12, n21, n22
                y_ref = y_new
                k1 = ks[6]  # FSAL
                if err == 0.0:
                    fac = 6.0
                else:
                    fac = 0.9 * err ** -0.2 * err_prev ** 0.08
                err_prev = max(err, 1e-10)
                h *= min(6.0, max(0.2, fac))
            else:
                shrink = 0.5 if not sheet_ok else max(0.1, 0.9 * err ** -0.2)
                h *= min(0.9, shrink)
                k1 = None
            nsteps += 1
    for val in (y11, y12, y21, y22):
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise IntegrationError("non-finite transport values")
    return np.array([[y11, y12], [y21, y22]], dtype=complex)


# -- monodromy representation ----------------------------------------------------


@dataclass(frozen=True)
class MonodromyRepresentation:
    matrices: tuple  # 2g numpy 2x2 arrays, order a1, b1, ..., ag, bg
    loop_names: tuple
    relation_residual: float
    det_residuals: tuple
    relation_tol: float
    det_tol: float

    @property
    def valid(self) -> bool:
        return self.relation_residual <= self.relation_tol and all(
            d <= self.det_tol for d in self.det_residuals
        )

    @property
    def genus(self) -> int:
        return len(self.matrices) // 2

    def to_json(self):
        return {
            "loop_names": list(self.loop_names),
            "matrices": [
                [[z.real, z.imag] for z in m.ravel()] for m in self.matrices
            ],
            "relation_residual": self.relation_residual,
            "det_residuals": list(self.det_residuals),
            "relation_tol": self.relation_tol,
            "det_tol": self.det_tol,
            "valid": self.valid,
        }


def _sl2_inverse(m: np.ndarray) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / det


def _opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def monodromy(
    curve,
    system,
    loops: LoopSystem,
    ode_tol: float,
    relation_tol: float = 1e-8,
    det_tol: float = 1e-10,
    threads: int = 1,
) -> MonodromyRepresentation:
    """Integrate all 2g loops and assemble the representation.

    Matrices are transport inverses (see module docstring), so the stored
    family satisfies prod_i [A_i, B_i] = I up to the reported residual; the
    determinant residuals are measured on the raw transports.  Loops are
    independent integrations and may run on a thread pool; results are
    merged by loop index.
    """
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            transports = list(
                pool.map(
                    lambda loop: integrate_loop(curve, system, loop, ode_tol),
                    loops.loops,
                )
            )
    else:
        transports = [
            integrate_loop(curve, system, loop, ode_tol) for loop in loops.loops
        ]
    det_res = tuple(
        float(abs((m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) - 1.0)) for m in transports
    )
    mats = tuple(_sl2_inverse(m) for m in transports)
    g = loops.genus
    rel = np.eye(2, dtype=complex)
    for i in range(g):
        a, b = mats[2 * i], mats[2 * i + 1]
        rel = rel @ a @ b @ _sl2_inverse(a) @ _sl2_inverse(b)
    residual = _opnorm(rel - np.eye(2))
    return MonodromyRepresentation(
        mats,
        tuple(l.name for l in loops.loops),
        float(residual),
        det_res,
        relation_tol,
        det_tol,
    )


# -- trace coordinates ------------------------------------------------------------


@dataclass(frozen=True)
class TraceVector:
    words: tuple  # tuples of generator names, e.g. ("a1", "b1", "a2")
    values: tuple  # complex traces, same order

    def to_json(self):
        return {
            "words": ["*".join(w) for w in self.words],
            "values": [[v.real, v.imag] for v in self.values],
        }


def standard_word_list(g: int) -> tuple:
    """The documented trace word list: 2g singles, the g handle products
    a_i b_i, the mixed triple a1 b1 a2, then deterministic pair padding
    (a_i a_j, then b_i b_j, then a_i b_j for i < j) up to 6g - 3 entries."""
    names = [f"{k}{i}" for i in range(1, g + 1) for k in ("a", "b")]
    words = [(nm,) for nm in names]
    words += [(f"a{i}", f"b{i}") for i in range(1, g + 1)]
    words.append(("a1", "b1", "a2"))
    padding = []
    padding += [(f"a{i}", f"a{j}") for i in range(1, g + 1) for j in range(i + 1, g + 1)]
    padding += [(f"b{i}", f"b{j}") for i in range(1, g + 1) for j in range(i + 1, g + 1)]
    padding += [
        (f"a{i}", f"b{j}") for i in range(1, g + 1) for j in range(1, g + 1) if i != j
    ]
    target = 6 * g - 3
    for w in padding:
        if len(words) >= target:
            break
        words.append(w)
    return tuple(words)


def trace_vector(rep: MonodromyRepresentation, words=None) -> TraceVector:
    """Traces of the documented word list in the generator matrices.

    Requires a valid representation (relation and determinant residuals
    within their configured tolerances).
    """
    if not rep.valid:
        raise ValueError(
            f"invalid representation: relation residual {rep.relation_residual:.3e}, "
            f"max det residual {max(rep.det_residuals):.3e}"
        )
    g = rep.genus
    if words is None:
        words = standard_word_list(g)
    lookup = {name: rep.matrices[i] for i, name in enumerate(rep.loop_names)}
    values = []
    for w in words:
        m = np.eye(2, dtype=complex)
        for name in w:
            m = m @ lookup[name]
        values.append(complex(m[0, 0] + m[1, 1]))
    return TraceVector(tuple(tuple(w) for w in words), tuple(values))


# -- irreducibility probe -----------------------------------------------------------


@dataclass(frozen=True)
class IrreducibilityVerdict:
    probably_irreducible: bool
    witness: tuple | None  # common eigenvector as (v1, v2) when found

    def to_json(self):
        return {
            "verdict": "probably_irreducible"
            if self.probably_irreducible
            else "common_eigenvector_found",
            "witness": None
            if self.witness is None
            else [[self.witness[0].real, self.witness[0].imag],
                  [self.witness[1].real, self.witness[1].imag]],
        }


def irreducibility_probe(rep: MonodromyRepresentation, tol: float = 1e-6) -> IrreducibilityVerdict:
    """Search for a common eigenvector of all generators.

    A proper parabolic in SL(2, C) stabilizes a line, so a representation is
    reducible exactly when such a common line exists.  Candidate lines come
    from the eigenvectors of the first generator that is not a scalar
    multiple of the identity; each candidate is tested against all
    generators at the given relative tolerance.  Requires a valid
    representation.
    """
    if not rep.valid:
        raise ValueError("invalid representation")
    mats = rep.matrices
    scale = max(max(_opnorm(m) for m in mats), 1.0)
    candidates = None
    for m in mats:
        centered = m - (np.trace(m) / 2.0) * np.eye(2)
        if _opnorm(centered) > tol * scale:
            _, vecs = np.linalg.eig(m)
            candidates = [vecs[:, 0], vecs[:, 1]]
            break
    if candidates is None:
        # every generator is (numerically) central: every line is invariant
        return IrreducibilityVerdict(False, (1.0 + 0j, 0j))
    for v in candidates:
        v = v / np.linalg.norm(v)
        common = True
        for m in mats:
            image = m @ v
            mu = np.vdot(v, image)
            if np.linalg.norm(image - mu * v) > tol * max(_opnorm(m), 1.0):
                common = False
                break
        if common:
            return IrreducibilityVerdict(False, (complex(v[0]), complex(v[1])))
    return IrreducibilityVerdict(True, None)
