"""Exact algebraic arithmetic: entropies, Perron decisions, censuses.

Algebraic reals are stored as an irreducible primitive integer minimal
polynomial plus an isolating rational interval. Every comparison is decided
exactly by interval refinement; floating point is display-only.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, factorial, gcd, lcm

import sympy
from sympy import Poly, Symbol, cyclotomic_poly, divisors, factorint, totient

from . import graphs, shiftspace as ss
from .errors import (
    EntropyNotSeparated,
    NotAlgebraicInteger,
    NotMixingTarget,
    ParseError,
    UnboundedSearch,
    ZeroMatrix,
)

_X = Symbol("x")
_Y = Symbol("y")

LT, EQ, GT = "LT", "EQ", "GT"


@dataclass(frozen=True)
class AlgebraicReal:
    poly: tuple  # integer coefficients, ascending degree
    lo: Fraction
    hi: Fraction

    def degree(self):
        return len(self.poly) - 1

    def is_rational(self):
        return self.degree() == 1

    def rational_value(self):
        return Fraction(-self.poly[0], self.poly[1])

    def approx(self):
        a = refine_to_width(self, Fraction(1, 10**12))
        return float((a.lo + a.hi) / 2)


@dataclass(frozen=True)
class EntropyValue:
    base: AlgebraicReal  # the value e^h
    approx: float


@dataclass(frozen=True)
class Tol:
    """Additive entropy tolerance nats + log2 * log(2), kept exact."""

    nats: Fraction
    log2: Fraction

    def half(self):
        return Tol(self.nats / 2, self.log2 / 2)

    def is_zero(self):
        return self.nats == 0 and self.log2 == 0


@dataclass
class PeriodicCensus:
    counts: dict  # least-period k -> number of points of least period k
    horizon: int

    def q(self, k):
        return self.counts.get(k, 0)


def _eval_poly(coeffs, point):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * point + c
    return acc


def _sign(x):
    return (x > 0) - (x < 0)


def _sym_poly(coeffs):
    return Poly(list(reversed(coeffs)), _X)


def _ascending(poly):
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


def _normalize(poly):
    """Primitive part with positive leading coefficient."""
    _, prim = poly.primitive()
    if prim.LC() < 0:
        prim = -prim
    return prim


def _fraction(x):
    r = sympy.Rational(x)
    return Fraction(int(r.p), int(r.q))


def _alg(poly, lo, hi):
    return AlgebraicReal(_ascending(poly), Fraction(lo), Fraction(hi))


def alg_rational(value):
    value = Fraction(value)
    return AlgebraicReal(
        (-value.numerator, value.denominator), value, value
    )


ONE = alg_rational(1)


def refine(a):
    """Halve the isolating interval (new value; inputs are immutable)."""
    if a.is_rational():
        return a
    mid = (a.lo + a.hi) / 2
    if _sign(_eval_poly(a.poly, a.lo)) * _sign(_eval_poly(a.poly, mid)) < 0:
        return AlgebraicReal(a.poly, a.lo, mid)
    return AlgebraicReal(a.poly, mid, a.hi)


def refine_to_width(a, width):
    while a.hi - a.lo > width:
        a = refine(a)
    return a


def refine_positive(a):
    """Refine until the interval lies strictly right of zero."""
    for _ in range(10000):
        if a.lo > 0:
            return a
        if a.hi < 0 or a.is_rational():
            break
        a = refine(a)
    if a.is_rational() and a.rational_value() > 0:
        return a
    raise UnboundedSearch("value is not strictly positive")


def _roots_of_factor(factor_poly):
    """All real roots of one irreducible integer polynomial."""
    if factor_poly.degree() == 1:
        c0, c1 = _ascending(factor_poly)
        return [alg_rational(Fraction(-c0, c1))]
    out = []
    for (lo, hi), _ in factor_poly.intervals():
        out.append(_alg(factor_poly, _fraction(lo), _fraction(hi)))
    return out


def real_roots(coeffs):
    """Real roots of an integer polynomial, as AlgebraicReals."""
    poly = _sym_poly(coeffs)
    out = []
    for factor_poly, _ in poly.factor_list()[1]:
        out.extend(_roots_of_factor(_normalize(factor_poly)))
    return out


def largest_real_root(coeffs):
    roots = real_roots(coeffs)
    if not roots:
        return None
    best = roots[0]
    for r in roots[1:]:
        if compare(r, best) == GT:
            best = r
    return best


def compare(a, b):
    """Exact trichotomy on algebraic reals (or entropy values)."""
    a = a.base if isinstance(a, EntropyValue) else a
    b = b.base if isinstance(b, EntropyValue) else b
    if a.poly == b.poly:
        if a.is_rational():
            return EQ
        lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
        if lo < hi and _sym_poly(a.poly).count_roots(lo, hi) == 1:
            return EQ
    for _ in range(100000):
        if a.hi < b.lo:
            return LT
        if b.hi < a.lo:
            return GT
        a, b = refine(a), refine(b)
    raise UnboundedSearch("comparison failed to separate")


def _isolate(poly, lo, hi, narrow):
    """The unique root of `poly` in (lo, hi); `narrow()` yields tighter
    enclosing intervals when several roots land inside."""
    while True:
        total = []
        for factor_poly, _ in poly.factor_list()[1]:
            factor_poly = _normalize(factor_poly)
            count = factor_poly.count_roots(lo, hi)
            if count:
                total.append((factor_poly, count))
        if len(total) == 1 and total[0][1] == 1:
            factor_poly = total[0][0]
            if factor_poly.degree() == 1:
                c0, c1 = _ascending(factor_poly)
                return alg_rational(Fraction(-c0, c1))
            return _alg(factor_poly, lo, hi)
        lo, hi = narrow()


def _binary_op(a, b, build_expr, interval):
    a = refine_positive(a)
    b = refine_positive(b)
    res = Poly(
        sympy.resultant(
            _sym_poly(a.poly).as_expr().subs(_X, _Y), build_expr(b), _Y
        ),
        _X,
    )

    def narrow():
        nonlocal a, b
        a, b = refine(a), refine(b)
        return interval(a, b)

    lo, hi = interval(a, b)
    return _isolate(res, lo, hi, narrow)


def alg_mul(a, b):
    """Product of two positive algebraic reals."""
    if a.is_rational() and b.is_rational():
        return alg_rational(a.rational_value() * b.rational_value())

    def build(b_):
        db = b_.degree()
        return sympy.expand(
            sum(
                c * _X**i * _Y ** (db - i)
                for i, c in enumerate(b_.poly)
            )
        )

    return _binary_op(a, b, build, lambda a_, b_: (a_.lo * b_.lo, a_.hi * b_.hi))


def alg_reciprocal(a):
    a = refine_positive(a)
    if a.is_rational():
        return alg_rational(1 / a.rational_value())
    rev = tuple(reversed(a.poly))
    poly = _normalize(_sym_poly(rev))
    return _alg(poly, 1 / a.hi, 1 / a.lo)


def alg_div(a, b):
    return alg_mul(a, alg_reciprocal(b))


def alg_pow(a, k):
    """a^k for integer k >= 0, a > 0."""
    if k == 0:
        return ONE
    if k == 1:
        return a
    a = refine_positive(a)
    if a.is_rational():
        return alg_rational(a.rational_value() ** k)
    res = Poly(
        sympy.resultant(
            _sym_poly(a.poly).as_expr().subs(_X, _Y), _X - _Y**k, _Y
        ),
        _X,
    )
    box = [a]

    def narrow():
        box[0] = refine(box[0])
        return box[0].lo ** k, box[0].hi ** k

    return _isolate(res, a.lo**k, a.hi**k, narrow)


def nth_root_of_rational(value, n):
    """The positive real n-th root of a positive rational."""
    value = Fraction(value)
    if value <= 0:
        raise ParseError("root of a nonpositive rational")
    if n == 1:
        return alg_rational(value)
    poly = [0] * (n + 1)
    poly[0] = -value.numerator
    poly[n] = value.denominator
    candidates = [r for r in real_roots(tuple(poly)) if _is_positive(r)]
    if len(candidates) != 1:
        raise UnboundedSearch("root isolation failed")
    return candidates[0]


def _is_positive(a):
    if a.is_rational():
        return a.rational_value() > 0
    if a.lo > 0:
        return True
    if a.hi < 0:
        return False
    return compare(a, alg_rational(0)) == GT


def two_pow(exponent):
    """2^(p/q) as an exact algebraic real."""
    exponent = Fraction(exponent)
    p, q = exponent.numerator, exponent.denominator
    if q == 1:
        return alg_rational(Fraction(2) ** p)
    # x^q - 2^p is already irreducible when gcd(p, q) = 1: 2^p is not an
    # l-th power for any prime l dividing q, so the binomial criterion
    # applies. Building the root directly skips a factorization whose
    # cost blows up with q.
    value = Fraction(2) ** p
    poly = [0] * (q + 1)
    poly[0] = -value.numerator
    poly[q] = value.denominator
    lo = Fraction(2) ** (p // q)
    return AlgebraicReal(tuple(poly), lo, 2 * lo)


def exp_bounds(r, terms):
    """Rational lower/upper bounds for e^r from the Taylor series."""
    r = Fraction(r)
    if r < 0:
        lo, hi = exp_bounds(-r, terms)
        return 1 / hi, 1 / lo
    terms = max(terms, 2 * ceil(r) + 4)
    partial = Fraction(0)
    power = Fraction(1)
    for k in range(terms + 1):
        partial += power
        power = power * r / (k + 1)
    # power is now r^(terms+1)/(terms+1)!; geometric tail bound
    ratio = r / (terms + 2)
    tail = power / (1 - ratio)
    return partial, partial + tail


def compare_to_exp(a, r):
    """Compare a positive algebraic real against e^r, r rational."""
    r = Fraction(r)
    if r == 0:
        return compare(a, ONE)
    terms = 8
    for _ in range(300):
        lo, hi = exp_bounds(r, terms)
        if a.hi < lo:
            return LT
        if a.lo > hi:
            return GT
        a = refine(a)
        terms += 4
    raise UnboundedSearch("exponential comparison failed to separate")


def _same_scaled_root(a, b, scale, log2):
    """Exact test for a == b * 2^(p/q) once interval refinement stalls.

    Every product of a conjugate of b with a real q-th root of 2^p is a
    root of S(x) = Res_y(P_b(y), x^q - 2^p * y^q), and S is computed
    without any polynomial factoring. If the minimal polynomial of a does
    not divide S the two values are distinct. Otherwise refine until each
    side's interval isolates exactly one root of S; the values coincide
    precisely when the intersection still holds a root.
    """
    p, q = log2.numerator, log2.denominator
    if p >= 0:
        elim = _X**q - 2**p * _Y**q
    else:
        elim = 2 ** (-p) * _X**q - _Y**q
    s_expr = sympy.resultant(_sym_poly(b.poly).as_expr().subs(_X, _Y), elim, _Y)
    s_poly = Poly(s_expr, _X)
    if not s_poly.rem(_sym_poly(a.poly)).is_zero:
        return False
    s_poly = s_poly.quo(s_poly.gcd(s_poly.diff(_X)))
    for _ in range(200):
        lo = b.lo * scale.lo
        hi = b.hi * scale.hi
        if a.hi < lo or hi < a.lo:
            return False
        if (
            s_poly.count_roots(a.lo, a.hi) == 1
            and s_poly.count_roots(lo, hi) == 1
        ):
            return s_poly.count_roots(max(a.lo, lo), min(a.hi, hi)) == 1
        a, b, scale = refine(a), refine(b), refine(scale)
    raise UnboundedSearch("scaled equality test failed to isolate")


def compare_scaled(a, b, log2=Fraction(0), nats=Fraction(0)):
    """Compare a against b * 2^log2 * e^nats, all exactly.

    The scaled right side is never built as a normalized algebraic number;
    that would force a polynomial factorization whose cost explodes with
    the degrees involved. Interval refinement on the separate factors
    decides every strict inequality, and the one case refinement cannot
    settle, exact equality with nats == 0, falls to a resultant
    divisibility test that still avoids factoring.
    """
    a = a.base if isinstance(a, EntropyValue) else a
    b = b.base if isinstance(b, EntropyValue) else b
    log2, nats = Fraction(log2), Fraction(nats)
    if log2 == 0 and nats == 0:
        return compare(a, b)
    a = refine_positive(a)
    b = refine_positive(b)
    scale = refine_positive(two_pow(log2)) if log2 else ONE
    terms = 8
    tested_equal = False
    for step in range(400):
        if nats:
            exp_lo, exp_hi = exp_bounds(nats, terms)
        else:
            exp_lo = exp_hi = Fraction(1)
        if a.hi < b.lo * scale.lo * exp_lo:
            return LT
        if a.lo > b.hi * scale.hi * exp_hi:
            return GT
        if nats == 0 and not tested_equal and step >= 40:
            # A nonzero nats makes equality impossible (e^nats is not
            # algebraic), so only this branch ever needs an exact test.
            if _same_scaled_root(a, b, scale, log2):
                return EQ
            tested_equal = True
        a, b, scale = refine(a), refine(b), refine(scale)
        terms += 4
    raise UnboundedSearch("scaled comparison failed to separate")


def entropy_lt(a, b, tol):
    """True iff h(a) < h(b) + tol."""
    return compare_scaled(a, b, tol.log2, tol.nats) == LT


def entropy_within(a, b, tol):
    """True iff |h(a) - h(b)| < tol."""
    return entropy_lt(a, b, tol) and entropy_lt(b, a, tol)


def char_poly(matrix):
    """Exact characteristic polynomial det(xI - A), ascending coefficients."""
    mat = [[int(x) for x in row] for row in matrix]
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ParseError("characteristic polynomial needs a square matrix")
    return tuple(
        int(c) for c in reversed(sympy.Matrix(mat).charpoly(_X).all_coeffs())
    )


def perron_root(matrix):
    """Spectral radius of a nonnegative integer matrix, exactly."""
    for row in matrix:
        for x in row:
            if int(x) < 0:
                raise ParseError("matrix entries must be >= 0")
    root = largest_real_root(char_poly(matrix))
    if root is None or compare(root, alg_rational(0)) != GT:
        raise ZeroMatrix("spectral radius is zero")
    return root


def entropy(shift):
    """Entropy of the shift, carried exactly as the base e^h."""
    if isinstance(shift, ss.SoficPresentation):
        g = ss.canonical_presentation(shift)
    else:
        g = ss.presentation(shift)
    mat, _ = graphs.adjacency_matrix(g)
    base = perron_root(mat)
    return EntropyValue(base, base.approx())


def entropy_from_base(base):
    return EntropyValue(base, base.approx())


def _mobius(n):
    if n == 1:
        return 1
    factors = factorint(n)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def _matrix_traces(mat, horizon):
    n = len(mat)
    entries = [
        (t, j, mat[t][j])
        for t in range(n)
        for j in range(n)
        if mat[t][j]
    ]
    traces = {}
    power = [list(row) for row in mat]
    for k in range(1, horizon + 1):
        if k > 1:
            nxt = []
            for row in power:
                new_row = [0] * n
                for t, j, m in entries:
                    if row[t]:
                        new_row[j] += row[t] * m
                nxt.append(new_row)
            power = nxt
        traces[k] = sum(power[i][i] for i in range(n))
    return traces


def periodic_point_counts(shift, horizon):
    """p_k = number of points with period dividing k, for k <= horizon."""
    if isinstance(shift, (ss.EdgeShift, ss.SftForbidden)):
        mat, _ = graphs.adjacency_matrix(ss.presentation(shift))
        return _matrix_traces(mat, horizon)
    counts = {}
    for k in range(1, horizon + 1):
        counts[k] = sum(
            1 for w in ss.words(shift, k) if ss.orbit_in_shift(shift, w)
        )
    return counts


def q_census(shift, horizon):
    """Counts of periodic points by least period, exactly.

    Finite-type descriptions go through traces of their faithful edge
    presentations; sofic presentations count points of the shift itself by
    testing each length-k word's periodic repetition.
    """
    if horizon < 1:
        raise ParseError("census horizon must be >= 1")
    p = periodic_point_counts(shift, horizon)
    counts = {}
    for k in range(1, horizon + 1):
        counts[k] = sum(_mobius(k // d) * p[d] for d in divisors(k))
    return PeriodicCensus(counts, horizon)


def _require_monic(a):
    if a.poly[-1] != 1:
        raise NotAlgebraicInteger(
            "minimal polynomial is not monic: %r" % (a.poly,)
        )


def _power_sums(coeffs, count):
    """Power sums s_1..s_count of the roots, by Newton's identities.

    Integer output for monic integer input, Fractions otherwise.
    """
    d = len(coeffs) - 1
    lead = coeffs[-1]
    if lead == 1:
        a = [coeffs[d - i] for i in range(1, d + 1)]
    else:
        a = [Fraction(coeffs[d - i], lead) for i in range(1, d + 1)]
    sums = []
    for k in range(1, count + 1):
        acc = -k * a[k - 1] if k <= d else 0
        for i in range(1, min(k - 1, d) + 1):
            acc -= a[i - 1] * sums[k - i - 1]
        sums.append(acc)
    return sums


def _poly_from_power_sums(sums, degree):
    """Ascending coefficients of the monic polynomial whose roots have
    the given power sums, by the inverse Newton recurrence."""
    rational = any(
        isinstance(s, Fraction) and s.denominator != 1 for s in sums
    )
    e = [Fraction(1) if rational else 1]
    for k in range(1, degree + 1):
        acc = 0
        for i in range(1, k + 1):
            term = sums[i - 1] * e[k - i]
            acc = acc + term if i % 2 else acc - term
        if rational:
            e.append(Fraction(acc) / k)
        else:
            quo, rem = divmod(acc, k)
            if rem:
                raise UnboundedSearch(
                    "power sums do not describe a monic integer polynomial"
                )
            e.append(quo)
    return [(-1) ** (degree - j) * e[degree - j] for j in range(degree + 1)]


def _coeff_poly(asc):
    """Normalized sympy polynomial from ascending coefficients."""
    den = 1
    for c in asc:
        if isinstance(c, Fraction) and c.denominator != 1:
            den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in asc]
    return _normalize(Poly(ints[::-1], _X))


def _squares_poly(coeffs):
    """Monic integer polynomial with roots a_i^2 over the input roots.

    Composed polynomials are assembled from power sums rather than
    resultants; the resultant route costs minutes already at degree ten
    while the Newton recurrences stay polynomial in plain integer
    arithmetic.
    """
    d = len(coeffs) - 1
    s = _power_sums(coeffs, 2 * d)
    return _coeff_poly(_poly_from_power_sums(s[1::2], d))


def _products_poly(coeffs):
    """Monic integer polynomial with roots a_i * a_j over all ordered
    root pairs; the power sums of the pair products are the squared
    power sums of the roots."""
    d = len(coeffs) - 1
    s = _power_sums(coeffs, d * d)
    return _coeff_poly(_poly_from_power_sums([v * v for v in s], d * d))


def _ratios_poly(coeffs):
    """Polynomial with roots a_i / a_j over all ordered root pairs; the
    reversed polynomial supplies the power sums of the inverse roots."""
    d = len(coeffs) - 1
    if d == 1:
        return Poly([1, -1], _X)
    s = _power_sums(coeffs, d * d)
    t = _power_sums(coeffs[::-1], d * d)
    pairs = [Fraction(u) * v for u, v in zip(s, t)]
    return _coeff_poly(_poly_from_power_sums(pairs, d * d))


def _list_square(a):
    out = [0] * (2 * len(a) - 1)
    for i, ai in enumerate(a):
        if not ai:
            continue
        out[2 * i] += ai * ai
        for j in range(i + 1, len(a)):
            if a[j]:
                out[i + j] += 2 * ai * a[j]
    return out


def _graeffe_step(coeffs):
    """Monic integer polynomial whose roots are the squares of the
    input roots: E(y)^2 - y * O(y)^2 for the even and odd parts."""
    d = len(coeffs) - 1
    out = [0] * (d + 1)
    for i, c in enumerate(_list_square(coeffs[0::2])):
        out[i] += c
    for i, c in enumerate(_list_square(coeffs[1::2])):
        out[i + 1] -= c
    if out[-1] < 0:
        out = [-c for c in out]
    return out


def _pellet_separates(coeffs, radius, k):
    """True when |c_k| R^k alone beats every other |c_i| R^i at
    R = radius, so exactly k roots lie strictly inside |x| < R and the
    remaining ones strictly outside."""
    d = len(coeffs) - 1
    num, den = radius.numerator, radius.denominator
    np_, dp_ = [1], [1]
    for _ in range(d):
        np_.append(np_[-1] * num)
        dp_.append(dp_[-1] * den)
    main = 0
    rest = 0
    for i, c in enumerate(coeffs):
        term = abs(c) * np_[i] * dp_[d - i]
        if i == k:
            main = term
        else:
            rest += term
    return main > rest


def _products_tie(coeffs, own):
    """Does some conjugate pair multiply to exactly the dominant root's
    square?  That square accounts for one root of the pairwise-products
    polynomial, so a tie exists precisely when its minimal polynomial
    divides the products polynomial at least twice."""
    products = _products_poly(coeffs)
    quotient, remainder = products.div(own)
    if not remainder.is_zero:
        raise UnboundedSearch("products polynomial lost its own root")
    return quotient.rem(own).is_zero


def _dyadic_down(r):
    return Fraction((r.numerator << 64) // r.denominator, 1 << 64)


def _dyadic_up(r):
    return Fraction(-((-r.numerator << 64) // r.denominator), 1 << 64)


def is_perron(x):
    """Exact Perron test: algebraic integer >= 1 strictly dominating the
    moduli of all its other conjugates.

    Real conjugates are compared against x^2 through the squares
    polynomial.  Complex ones enter through their moduli, which Graeffe
    root squaring drives apart until a Pellet bound isolates the
    dominant root; moduli that never separate are decided by an exact
    tie test on the pairwise products.
    """
    x = x.base if isinstance(x, EntropyValue) else x
    _require_monic(x)
    if compare(x, ONE) == LT:
        return False
    if x.degree() == 1:
        return True
    lam2 = alg_pow(x, 2)
    squares = _squares_poly(x.poly)
    lam2_poly = _sym_poly(lam2.poly)
    seen_self = False
    for factor_poly, exponent in squares.factor_list()[1]:
        factor_poly = _normalize(factor_poly)
        is_own = factor_poly == lam2_poly
        if is_own and exponent > 1:
            return False  # some conjugate equals -x
        for root in _roots_of_factor(factor_poly):
            cmp_ = compare(root, lam2)
            if cmp_ == GT:
                return False
            if cmp_ == EQ:
                if seen_self:
                    return False
                seen_self = True
    # The dominant root always sits outside a bracket power, so a Pellet
    # success at the lower bracket certifies it alone on top, while one
    # at the upper bracket certifies some other root above it.  The
    # brackets are re-trimmed to dyadics each level to keep the integer
    # sizes proportional to the coefficients themselves.
    lam = refine_to_width(refine_positive(x), Fraction(1, 1 << 32))
    d = x.degree()
    coeffs = list(x.poly)
    lo_p, hi_p = lam.lo, lam.hi
    tie_checked = False
    for level in range(15):
        if level:
            coeffs = _graeffe_step(coeffs)
            lo_p = _dyadic_down(lo_p * lo_p)
            hi_p = _dyadic_up(hi_p * hi_p)
        if _pellet_separates(coeffs, lo_p, d - 1):
            return True
        for k in range(d - 1, max(d - 6, 0) - 1, -1):
            if _pellet_separates(coeffs, hi_p, k):
                return False
        if level == 6 and not tie_checked:
            tie_checked = True
            if _products_tie(x.poly, lam2_poly):
                return False
    if not tie_checked and _products_tie(x.poly, lam2_poly):
        return False
    raise UnboundedSearch("conjugate moduli resisted separation")


def _cyclotomic_orders(poly):
    """Orders k for which the irreducible `poly` equals the k-th
    cyclotomic polynomial."""
    e = poly.degree()
    orders = []
    k = 1
    while totient(k) <= e or k <= 6:
        if totient(k) == e and poly == Poly(cyclotomic_poly(k, _X), _X):
            orders.append(k)
        k += 1
        if k > 4 * e * e + 8:
            break
    return orders


def is_weak_perron(x):
    """(answer, p): smallest p with x^p Perron, or (False, None).

    Conjugate ratios on the unit circle must be roots of unity for any
    power to become Perron; their orders are read off the cyclotomic
    factors of the ratios polynomial, so testing the divisors of their
    lcm is exhaustive.
    """
    x = x.base if isinstance(x, EntropyValue) else x
    _require_monic(x)
    if compare(x, ONE) == LT:
        return False, None
    if is_perron(x):
        return True, 1
    ratios = _ratios_poly(x.poly)
    orders = set()
    for factor_poly, _ in ratios.factor_list()[1]:
        orders.update(_cyclotomic_orders(_normalize(factor_poly)))
    orders.discard(1)
    if not orders:
        return False, None
    bound = lcm(*orders) if len(orders) > 1 else next(iter(orders))
    for p in sorted(divisors(bound)):
        if p == 1:
            continue
        if is_perron(alg_pow(x, p)):
            return True, p
    return False, None


def _upper_rational(a, slack=Fraction(1, 64)):
    a = refine_to_width(a, slack)
    return a.hi


def _separated_bounds(x_base, y_base):
    """(a, r, c) rationals with x <= a < r < y <= c, a >= 1, r*r > c."""
    if compare(x_base, y_base) != LT:
        raise EntropyNotSeparated("entropy of X must be strictly below Y")
    a_val, b_val = x_base, y_base
    for _ in range(10000):
        a, b, c = a_val.hi, b_val.lo, b_val.hi
        if a < b and b > 1:
            a = max(a, Fraction(1))
            r = b - (b - a) / 1000
            if a < r and r * r > c:
                return a, r, c
        a_val, b_val = refine(a_val), refine(b_val)
    raise UnboundedSearch("failed to separate entropies")


def _find_doubling_window(shift, rho):
    """m with (number of length-m words) <= rho^m."""
    g = ss.canonical_presentation(shift)
    m = 1
    while m <= 4096:
        if Fraction(graphs.word_count(g, m)) <= rho**m:
            return m
        m *= 2
    raise UnboundedSearch("word growth never dropped below rho")


def _positive_power_exponent(mat):
    n = len(mat)
    boolean = [[1 if x else 0 for x in row] for row in mat]
    power = [row[:] for row in boolean]
    for t in range(1, n * n + 2):
        if all(all(x for x in row) for row in power):
            return t
        power = [
            [
                1 if any(power[i][k] and boolean[k][j] for k in range(n)) else 0
                for j in range(n)
            ]
            for i in range(n)
        ]
    raise NotMixingTarget("matrix is not primitive")


def _growth_vector(mat, rate):
    """Positive integer v with A v >= rate * v entrywise."""
    n = len(mat)
    v = [1] * n
    for _ in range(10000):
        av = [sum(mat[i][j] * v[j] for j in range(n)) for i in range(n)]
        if all(Fraction(av[i]) >= rate * v[i] for i in range(n)):
            return v
        v = [av[i] + v[i] for i in range(n)]
    raise UnboundedSearch("growth vector iteration did not converge")


def crossover_bound(low_shift, high_shift, linear_slack=False):
    """K* such that q_k(low) <= q_k(high) for every k > K*.

    Needs entropy(low) < entropy(high) and a mixing finite-type high
    shift. With linear_slack, the guarantee strengthens to
    q_k(low) + k <= q_k(high) for every k > K*.
    """
    if not isinstance(high_shift, (ss.EdgeShift, ss.SftForbidden)):
        raise NotMixingTarget("the dominating shift must be finite type")
    if not ss.structure(high_shift).mixing:
        raise NotMixingTarget("the dominating shift must be mixing")
    hx = entropy(low_shift)
    hy = entropy(high_shift)
    a, r, c = _separated_bounds(hx.base, hy.base)
    rho = (a + r) / 2
    sigma = (r + c / r) / 2
    assert rho < r and sigma < r and sigma * sigma >= c
    m = _find_doubling_window(low_shift, rho)
    g_low = ss.canonical_presentation(low_shift)
    c0 = max(
        Fraction(graphs.word_count(g_low, j)) / rho**j for j in range(m)
    )
    mat, _ = graphs.adjacency_matrix(ss.presentation(high_shift))
    n = len(mat)
    t0 = _positive_power_exponent(mat)
    v = _growth_vector(mat, r)
    c1 = Fraction(sum(v), max(v))
    big_b = Fraction(n) * c / (c - 1)
    k = t0 + 1
    if linear_slack:
        k = max(k, ceil(1 / (r - 1)) + 1)
    rho_k = rho**k
    sigma_k = sigma**k
    r_k = r ** (k - t0)
    for _ in range(200000):
        left = c0 * rho_k + big_b * sigma_k
        if linear_slack:
            left += k
        if left <= c1 * r_k:
            return k - 1
        k += 1
        rho_k *= rho
        sigma_k *= sigma
        r_k *= r
    raise UnboundedSearch("crossover search exceeded its budget")


def census_dominated_below(low_shift, high_shift, bound):
    """Check q_k(low) <= q_k(high) for all k <= bound; None or witness k."""
    low = q_census(low_shift, bound)
    high = q_census(high_shift, bound)
    for k in range(1, bound + 1):
        if low.q(k) > high.q(k):
            return k
    return None
