"""Independent oracles used across the test suite.

Nothing here reuses the code paths it checks: holomorphy comes from local
valuations, multiplication ranks from point evaluation and SVD, periods from
composite Gauss-Legendre quadrature, loop words from exact finite-field
representations of the branch-loop group, and exact ranks from sympy.
"""

import cmath
import random

import numpy as np
import numpy.polynomial.legendre as leg
import sympy

from diffsys.curves import HyperellipticCurve, PlaneQuartic
from diffsys.field import FloatMatrix, numeric_rank

# -- valuation oracle for hyperelliptic differentials --------------------------


def hyperelliptic_vanishing_order(curve, numer_coeffs, denom_class, weight, place):
    """Order of vanishing of p(x) dx^w / y^k at a branch point or infinity.

    Local valuations: at a finite branch point lambda, v(x - lambda) = 2,
    v(dx) = 1, v(y) = 1, and v(x - mu) = 0 for mu != lambda.  At the single
    point over infinity of an odd-degree model, v(x) = -2, v(dx) = -3,
    v(y) = -(2g+1).  For even degree (two points at infinity): v(x) = -1,
    v(dx) = -2, v(y) = -(g+1).
    """
    k = {"y": 1, "y2": 2}[denom_class]
    coeffs = [c for c in numer_coeffs]
    deg = -1
    for i, c in enumerate(coeffs):
        if not c.is_zero():
            deg = i
    if deg < 0:
        raise ValueError("zero differential has no finite vanishing order")
    n = len(curve.branch_points)
    g = curve.genus
    if place == "infinity":
        if curve.odd_model:
            return -2 * deg + weight * (-3) - k * (-(2 * g + 1))
        return -deg + weight * (-2) - k * (-(g + 1))
    lam = place
    mult = _root_multiplicity(coeffs, lam)
    return 2 * mult + weight * 1 - k * 1


def _root_multiplicity(coeffs_ascending, lam):
    """Exact multiplicity of lam as a root, by repeated synthetic division."""
    mult = 0
    work = list(coeffs_ascending)
    while work:
        val = None
        for c in reversed(work):
            val = c if val is None else val * lam + c
        if not val.is_zero():
            break
        carry = None
        quot_desc = []
        for c in reversed(work):
            carry = c if carry is None else carry * lam + c
            quot_desc.append(carry)
        work = list(reversed(quot_desc[:-1]))
        mult += 1
    return mult


# -- evaluation-interpolation rank oracle --------------------------------------


def evaluation_rank(curve, differentials, rel_tol=1e-10, seed=1234):
    """Numeric rank of a family of weight-2 differentials via point sampling.

    Evaluates every differential at 3g-3 random curve points in a common
    trivialization and ranks the evaluation matrix; for generic points this
    equals the dimension of the span, independent of any coordinate basis.
    """
    rng = random.Random(seed)
    g = curve.genus
    npts = 3 * g - 3
    rows = []
    if isinstance(curve, HyperellipticCurve):
        roots = curve.float_roots()

        def f(x):
            acc = 1 + 0j
            for r in roots:
                acc *= x - r
            return acc

        pts = []
        while len(pts) < npts:
            x = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            if min(abs(x - r) for r in roots) > 1e-2:
                y = cmath.sqrt(f(x))
                pts.append((x, y))
        for x, y in pts:
            row = []
            for numer, denom_class in differentials:
                val = sum(
                    c.to_complex() * x**i for i, c in enumerate(numer)
                )
                row.append(val / (y * y if denom_class == "y2" else y))
            rows.append(row)
    else:
        assert isinstance(curve, PlaneQuartic)
        form = {e: c.to_complex() for e, c in curve.coefficients}

        def F(x, y):
            return sum(c * x**e[0] * y**e[1] for e, c in form.items())

        pts = []
        while len(pts) < npts:
            x = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            poly = [0j] * 5
            for e, c in form.items():
                poly[e[1]] += c * x ** e[0]
            roots_y = np.roots(list(reversed(poly)))
            for y in roots_y:
                pts.append((x, complex(y)))
                break
        for x, y in pts:
            row = []
            for numer, _ in differentials:
                val = sum(
                    c.to_complex() * x ** e[0] * y ** e[1] for e, c in dict(numer).items()
                )
                row.append(val)
            rows.append(row)
    mat = FloatMatrix.from_numpy(np.array(rows, dtype=complex))
    rank, _ = numeric_rank(mat, rel_tol)
    return rank


def theta_products(curve, basis1, w_coords_list):
    """(numer, denom_class) pairs for all products basis x W, in matrix column order."""
    from diffsys.curves import combine, multiply

    w_els = [combine(basis1, coords) for coords in w_coords_list]
    out = []
    for el in basis1.elements:
        for wel in w_els:
            prod = multiply(el, wel, curve)
            out.append((prod.numerator, prod.denom_class))
    return out


# -- quadrature period oracle ---------------------------------------------------

_NODES, _WEIGHTS = leg.leggauss(24)


def loop_integral(curve, loop, numer_coeffs, chunk=0.05):
    """Integral of (sum c_i x^i) dx / y along a loop polyline, by composite
    Gauss-Legendre with dense square-root continuation."""
    roots = curve.float_roots()

    def f(x):
        acc = 1 + 0j
        for r in roots:
            acc *= x - r
        return acc

    y = cmath.sqrt(f(loop.vertices[0]))
    if loop.sheets[0] < 0:
        y = -y
    total = 0j
    for a, b in zip(loop.vertices, loop.vertices[1:]):
        n = max(2, int(abs(b - a) / chunk) + 1)
        for m in range(n):
            p = a + (b - a) * m / n
            q = a + (b - a) * (m + 1) / n
            mid, half = (p + q) / 2, (q - p) / 2
            acc = 0j
            for t, w in zip(_NODES, _WEIGHTS):
                x = mid + half * t
                yy = cmath.sqrt(f(x))
                if abs(yy - y) > abs(-yy - y):
                    yy = -yy
                acc += w * sum(c * x**i for i, c in enumerate(numer_coeffs)) / yy
            total += acc * half
            yy = cmath.sqrt(f(q))
            if abs(yy - y) > abs(-yy - y):
                yy = -yy
            y = yy
    return total


# -- exact finite-field check of loop words --------------------------------------

_P = 2**61 - 1


def _inv_mod(a):
    return pow(a, _P - 2, _P)


def _mat_mul(a, b):
    return (
        (a[0] * b[0] + a[1] * b[2]) % _P,
        (a[0] * b[1] + a[1] * b[3]) % _P,
        (a[2] * b[0] + a[3] * b[2]) % _P,
        (a[2] * b[1] + a[3] * b[3]) % _P,
    )


def _sqrt_mod(n):
    if n == 0:
        return 0
    if pow(n, (_P - 1) // 2, _P) != 1:
        return None
    r = pow(n, (_P + 1) // 4, _P)
    return r if r * r % _P == n else None


def involution_rep(n_letters, rng):
    """n trace-zero SL2(F_p) matrices whose ordered product has trace zero.

    These are exactly representations of the group generated by the
    elementary branch loops (each an involution upstairs, with the loop at
    infinity also an involution), so any word that is trivial in pi_1 of the
    curve must evaluate to +-identity.
    """
    while True:
        mats = []
        for _ in range(n_letters - 1):
            a = rng.randrange(_P)
            b = rng.randrange(1, _P)
            c = (-(1 + a * a)) * _inv_mod(b) % _P
            mats.append((a, b, c, (-a) % _P))
        q = (1, 0, 0, 1)
        for m in mats:
            q = _mat_mul(q, m)
        if q[1] == 0 or q[2] == 0:
            continue
        a = rng.randrange(_P)
        s = (-a * (q[0] - q[3])) % _P
        aa, bb, cc = q[2] % _P, (-s) % _P, (-(1 + a * a) * q[1]) % _P
        disc = (bb * bb - 4 * aa * cc) % _P
        r = _sqrt_mod(disc)
        if r is None:
            continue
        b = (-bb + r) * _inv_mod(2 * aa) % _P
        if b == 0:
            continue
        c = (s - b * q[2]) % _P * _inv_mod(q[1]) % _P
        if (-a * a - b * c) % _P != 1:
            continue
        mats.append((a, b, c, (-a) % _P))
        return mats


def word_is_trivial_upstairs(words_product, n_letters, trials=8, seed=7):
    """Exact check that a concatenation of letter words is trivial in pi_1."""
    rng = random.Random(seed)
    idm = (1, 0, 0, 1)
    neg = (_P - 1, 0, 0, _P - 1)
    for _ in range(trials):
        mats = involution_rep(n_letters, rng)
        acc = idm
        for k in words_product:
            acc = _mat_mul(acc, mats[k - 1])
        if acc != idm and acc != neg:
            return False
    return True


# -- sympy exact-rank oracle -------------------------------------------------------


def sympy_rank(exact_matrix):
    rows = []
    for i in range(exact_matrix.rows):
        row = []
        for j in range(exact_matrix.cols):
            e = exact_matrix.get(i, j)
            row.append(
                sympy.Rational(e.re.numerator, e.re.denominator)
                + sympy.I * sympy.Rational(e.im.numerator, e.im.denominator)
            )
        rows.append(row)
    if not rows or not rows[0]:
        return 0
    return sympy.Matrix(rows).rank()
