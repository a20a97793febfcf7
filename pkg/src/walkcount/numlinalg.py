"""Characteristic polynomials, eigenvalues and generalized eigenspaces.

Integer polynomials are tuples of Python ints in ascending degree. Exact
multiplicities come from a squarefree decomposition over the integers; only
the roots of the squarefree factors are found numerically.
"""

import cmath
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
import scipy.linalg

from .errors import NumericalError

DEFAULT_TOL = 1e-9
ABERTH_MAX_ITER = 200


# -- exact polynomial arithmetic ------------------------------------------


def _trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_derivative(p):
    return _trim([k * c for k, c in enumerate(p)][1:] or [0])


def _poly_divmod(a, b):
    a = [Fraction(c) for c in _trim(a)]
    b = [Fraction(c) for c in _trim(b)]
    if b == [0]:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and a != [0]:
        shift = len(a) - len(b)
        coef = a[-1] / b[-1]
        q[shift] = coef
        for i, c in enumerate(b):
            a[i + shift] -= coef * c
        a = _trim(a)
        if len(a) < len(b):
            break
    return _trim(q), a


def primitive_part(p):
    """Scale a rational polynomial to coprime integers with positive leading term."""
    p = [Fraction(c) for c in _trim(p)]
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for c in ints:
        g = gcd(g, c)
    g = g or 1
    if ints[-1] < 0:
        g = -g
    return tuple(c // g for c in ints)


def _monic(p):
    p = [Fraction(c) for c in _trim(p)]
    return [c / p[-1] for c in p]


def _monic_gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b != [0]:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    return _monic(a)


def poly_gcd(a, b):
    return primitive_part(_monic_gcd(a, b))


def poly_exact_div(a, b):
    q, r = _poly_divmod(a, b)
    if any(c != 0 for c in r):
        raise ArithmeticError("polynomial division is not exact")
    return primitive_part(q)


def _sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


def squarefree_decomposition(p):
    """Yun's algorithm: ``[(factor, k), ...]`` with p = prod factor**k up to a unit.

    Factors are primitive integer polynomials of positive degree.
    """
    f = _monic(p)
    if len(f) <= 1:
        return []
    df = poly_derivative(f)
    a = _monic_gcd(f, df)
    b = _poly_divmod(f, a)[0]
    c = _poly_divmod(df, a)[0]
    d = _sub(c, poly_derivative(b))
    out = []
    k = 1
    while len(b) > 1:
        g = _monic_gcd(b, d) if d != [0] else _monic(b)
        if len(g) > 1:
            out.append((primitive_part(g), k))
        b = _poly_divmod(b, g)[0]
        c = _poly_divmod(d, g)[0]
        d = _sub(c, poly_derivative(b))
        k += 1
    return out


# -- characteristic polynomial --------------------------------------------


def char_poly(A):
    """Monic ``det(xI - A)`` by Faddeev-LeVerrier in exact integers."""
    M0 = [[int(x) for x in row] for row in np.asarray(A, dtype=object)]
    n = len(M0)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    M = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        AM = [[sum(M0[i][t] * M[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            AM[i][i] += coeffs[n - k + 1]
        M = AM
        trace = sum(sum(M0[i][t] * M[t][i] for t in range(n)) for i in range(n))
        assert trace % k == 0
        coeffs[n - k] = -trace // k
    return tuple(coeffs)


# -- roots ----------------------------------------------------------------


def _cauchy_bound(p):
    lead = abs(p[-1])
    return 1 + max(abs(c) for c in p[:-1]) / lead


def aberth(p, max_iter=ABERTH_MAX_ITER, tol=1e-14):
    """All roots of a polynomial with (ideally) simple roots, ascending coefficients.

    A root is frozen once its correction falls below ``tol`` relative or its
    residual is within the rounding bound ``4 eps sum |a_i| |z|^i``.
    """
    p = [complex(c) for c in p]
    deg = len(p) - 1
    if deg < 1:
        return []
    if deg == 1:
        return [-p[0] / p[1]]
    coeffs = np.array(p[::-1])  # descending for np.polyval
    dcoeffs = np.polyder(coeffs)
    abs_coeffs = np.abs(coeffs)
    eps = np.finfo(float).eps
    radius = _cauchy_bound([abs(c) for c in p])
    z = np.array(
        [radius * cmath.exp(1j * (2 * np.pi * k / deg + 0.4)) for k in range(deg)]
    )
    done = np.zeros(deg, dtype=bool)
    step = np.zeros(deg, dtype=complex)
    for it in range(max_iter):
        pz = np.polyval(coeffs, z)
        dpz = np.polyval(dcoeffs, z)
        done |= np.abs(pz) <= 4 * eps * np.polyval(abs_coeffs, np.abs(z))
        if done.all():
            return list(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            recip = 1.0 / diff
            np.fill_diagonal(recip, 0.0)
            step = ratio / (1.0 - ratio * recip.sum(axis=1))
        step = np.where(done, 0, step)
        if not np.all(np.isfinite(step)):
            raise NumericalError(
                "root finder produced a non-finite step",
                {"iteration": it, "estimates": z.tolist()},
            )
        z = z - step
        done |= np.abs(step) <= tol * np.maximum(1.0, np.abs(z))
        if done.all():
            return list(z)
    raise NumericalError(
        f"Aberth iteration did not converge in {max_iter} steps",
        {"estimates": z.tolist(), "last_step": np.abs(step).tolist()},
    )


def _backward_scale(p, x):
    return sum(abs(c) * abs(x) ** k for k, c in enumerate(p))


def _polish(p, roots):
    """Two Newton steps per root; squarefree factors have simple roots."""
    dp = poly_derivative(p)
    out = []
    for z in roots:
        for _ in range(2):
            d = poly_eval([complex(c) for c in dp], z)
            if d == 0:
                break
            z = z - poly_eval([complex(c) for c in p], z) / d
        out.append(z)
    return out


def _clean_root(p, z):
    """Snap to an exact integer root or a real number when that is what z is."""
    r = round(z.real)
    if abs(z - r) < 1e-6 * max(1.0, abs(z)) and poly_eval(p, r) == 0:
        return complex(r, 0.0)
    if abs(z.imag) <= 1e-12 * max(1.0, abs(z)):
        return complex(z.real, 0.0)
    return z


def eigenvalues(p):
    """Roots of an integer polynomial with exact multiplicities.

    Returns ``[(lambda, multiplicity), ...]`` sorted by decreasing modulus,
    then decreasing real part, then decreasing imaginary part.
    """
    out = []
    for factor, k in squarefree_decomposition(p):
        roots = _polish(factor, aberth(factor))
        cleaned = [_clean_root(factor, complex(z)) for z in roots]
        for z in cleaned:
            resid = abs(poly_eval([complex(c) for c in factor], z))
            if resid > 1e-10 * max(_backward_scale(factor, z), 1.0):
                raise NumericalError(
                    "root residual above tolerance",
                    {"factor": factor, "root": z, "residual": resid},
                )
            out.append((z, k))
    out.sort(key=lambda t: (-round(abs(t[0]), 12), -round(t[0].real, 12), -t[0].imag))
    return out


# -- subspaces ------------------------------------------------------------


def null_space(M, tol=DEFAULT_TOL):
    """Orthonormal basis (columns) of the numerical null space of ``M``.

    Singular values at or below ``tol`` times the largest one count as zero.
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    n = M.shape[1]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    _, s, vh = scipy.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(n, dtype=complex)
    rank = int(np.sum(s > tol * smax))
    return vh[rank:].conj().T


def rank(M, tol=DEFAULT_TOL):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return M.shape[1] - null_space(M, tol).shape[1]


def _shifted(A, lam):
    A = np.asarray(A, dtype=complex)
    return A - lam * np.eye(A.shape[0])


def nullity_ladder(A, lam, kmax, tol=DEFAULT_TOL):
    """Nullities of ``(A - lam I)^k`` for k = 1..kmax."""
    B = _shifted(A, lam)
    P = np.eye(B.shape[0], dtype=complex)
    out = []
    for _ in range(kmax):
        P = P @ B
        out.append(null_space(P, tol).shape[1])
    return out


def generalized_eigenspace(A, lam, multiplicity, tol=DEFAULT_TOL, left=False):
    """Basis of the generalized eigenspace of ``lam`` and its index.

    Returns ``(V, nu)`` where V is n x m (columns) for the right space, or
    m x n (rows) when ``left`` is true. ``nu`` is the least k for which the
    nullity of ``(A - lam I)^k`` reaches the algebraic multiplicity.
    """
    B = _shifted(A, lam)
    if left:
        B = B.T
    n = B.shape[0]
    P = np.eye(n, dtype=complex)
    nullities = []
    for k in range(1, n + 1):
        P = P @ B
        V = null_space(P, tol)
        nullities.append(V.shape[1])
        if V.shape[1] == multiplicity:
            return (V.T if left else V), k
        if V.shape[1] > multiplicity:
            break
    raise NumericalError(
        "nullity never matched the algebraic multiplicity; check the tolerance",
        {"eigenvalue": lam, "multiplicity": multiplicity, "nullities": nullities},
    )


@dataclass(frozen=True)
class EigenRecord:
    value: complex
    multiplicity: int
    index: int


@dataclass(frozen=True)
class Spectrum:
    records: tuple

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    @property
    def values(self):
        return [r.value for r in self.records]

    def find(self, lam, tol=1e-8):
        for r in self.records:
            if abs(r.value - lam) <= tol * max(1.0, abs(lam)):
                return r
        raise KeyError(f"{lam} is not an eigenvalue")


def spectrum(A, tol=DEFAULT_TOL):
    """Eigenvalues, algebraic multiplicities and indices of an integer matrix."""
    p = char_poly(A)
    Af = np.asarray(A, dtype=complex)
    records = []
    for lam, m in eigenvalues(p):
        _, nu = generalized_eigenspace(Af, lam, m, tol)
        records.append(EigenRecord(lam, m, nu))
    return Spectrum(tuple(records))


def minimal_polynomial(spec):
    """Coefficients (ascending, complex) of ``prod (x - lambda)^nu``."""
    coeffs = np.array([1.0 + 0j])
    for r in spec:
        for _ in range(r.index):
            coeffs = np.convolve(coeffs, np.array([-r.value, 1.0]))
    return coeffs


def matrix_poly_eval(coeffs, A):
    """Evaluate an ascending-coefficient polynomial at a square matrix (Horner)."""
    A = np.asarray(A, dtype=complex)
    out = np.zeros_like(A)
    eye = np.eye(A.shape[0])
    for c in reversed(list(coeffs)):
        out = out @ A + c * eye
    return out
