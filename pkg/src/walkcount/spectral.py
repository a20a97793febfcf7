"""Spectral projectors, closed forms for A^n and f(m), and dominant asymptotics."""

import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as npoly

from . import numlinalg
from .digraph import from_matrix, has_internal_arc, induced, irreducible_components, period
from .errors import InputError, NumericalError
from .numlinalg import DEFAULT_TOL, Spectrum

DOMINANT_TOL = 1e-9
SNAP_MAX_DENOMINATOR = 2**16
SNAP_TOL = 1e-9
INTERPOLATION_COND_WARN = 1e12


def _as_complex(A):
    return np.asarray(A, dtype=complex)


def _is_integer_matrix(A):
    A = np.asarray(A)
    if A.dtype == object:
        return all(isinstance(x, (int, np.integer)) for x in A.flat)
    return np.issubdtype(A.dtype, np.integer)


def _mpow(M, k):
    return np.linalg.matrix_power(M, k) if k else np.eye(M.shape[0], dtype=M.dtype)


def snap_rational(M, max_den=SNAP_MAX_DENOMINATOR, tol=SNAP_TOL):
    """Nearest-rational version of a real matrix, or None if any entry is off by > tol."""
    M = np.asarray(M, dtype=complex)
    out = []
    for row in M:
        snapped = []
        for x in row:
            if abs(x.imag) > tol:
                return None
            f = Fraction(x.real).limit_denominator(max_den)
            if abs(float(f) - x.real) > tol:
                return None
            snapped.append(f)
        out.append(snapped)
    return out


def spectral_projector(A, lam, V_R, V_L):
    """``E = V_R (V_L V_R)^{-1} V_L`` from right (columns) and left (rows) bases."""
    V_R = np.asarray(V_R, dtype=complex)
    V_L = np.asarray(V_L, dtype=complex)
    G = V_L @ V_R
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(
            "V_L V_R is numerically singular; the bases are not valid",
            {"eigenvalue": lam, "condition": float(cond)},
        )
    return V_R @ np.linalg.solve(G, V_L)


def _hermite_newton(nodes, values, derivs):
    """Newton coefficients of the Hermite interpolant on confluent ``nodes``.

    ``values[k]`` is the target value at ``nodes[k]`` and ``derivs`` maps a
    (node index of first occurrence, order) pair to a derivative / order!.
    Equal nodes must be adjacent.
    """
    N = len(nodes)
    first = {}
    for k, z in enumerate(nodes):
        first.setdefault(z, k)
    table = [complex(v) for v in values]
    coeffs = [table[0]]
    for r in range(1, N):
        nxt = []
        for j in range(N - r):
            if nodes[j] == nodes[j + r]:
                nxt.append(derivs.get((first[nodes[j]], r), 0.0))
            else:
                nxt.append((table[j + 1] - table[j]) / (nodes[j + r] - nodes[j]))
        table = nxt
        coeffs.append(table[0])
    return coeffs


def spectral_projector_poly(A, spec):
    """Projectors ``e_i(A)`` from Hermite interpolation polynomials.

    ``e_i`` equals 1 at ``lambda_i`` and has every other prescribed value and
    derivative (orders below each index) equal to zero. The interpolant is
    built in Newton form with repeated nodes and evaluated by a Horner scheme.
    """
    A = _as_complex(A)
    n = A.shape[0]
    nodes = []
    for r in spec:
        nodes.extend([complex(r.value)] * r.index)
    eye = np.eye(n)
    out = []
    for r in spec:
        values = [1.0 if z == complex(r.value) else 0.0 for z in nodes]
        coeffs = _hermite_newton(nodes, values, {})
        P = coeffs[-1] * eye
        scale = abs(coeffs[-1])
        for c, z in zip(reversed(coeffs[:-1]), reversed(nodes[: len(coeffs) - 1])):
            shifted = A - z * eye
            P = P @ shifted + c * eye
            scale = scale * np.linalg.norm(shifted, 2) + abs(c)
        cond = scale / max(np.linalg.norm(P, 2), np.finfo(float).tiny)
        if cond > INTERPOLATION_COND_WARN:
            warnings.warn(
                f"ill-conditioned projector interpolation for {r.value} (estimate {cond:.2e})",
                RuntimeWarning,
                stacklevel=2,
            )
        out.append(P)
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    matrix: np.ndarray
    spectrum: Spectrum
    projectors: tuple
    right_bases: tuple
    left_bases: tuple
    A_D: np.ndarray
    A_N: np.ndarray
    exact_projectors: tuple = None  # Fraction matrices when snapping succeeded

    @property
    def n(self):
        return self.matrix.shape[0]

    def __iter__(self):
        return iter(zip(self.spectrum, self.projectors))

    def projector(self, lam, tol=1e-8):
        for rec, E in self:
            if abs(rec.value - lam) <= tol * max(1.0, abs(lam)):
                return E
        raise KeyError(f"{lam} is not an eigenvalue")

    def record(self, lam, tol=1e-8):
        return self.spectrum.find(lam, tol)


def decompose(A, tol=DEFAULT_TOL, spec=None):
    """Full spectral decomposition of a square matrix.

    Without an explicit spectrum ``A`` must hold integers, so that the
    characteristic polynomial can be computed exactly. Projectors use the
    outerproduct of numerically computed right and left generalized
    eigenspace bases.
    """
    integer = _is_integer_matrix(A)
    if spec is None:
        if not integer:
            raise InputError("an explicit spectrum is required for non-integer matrices")
        spec = numlinalg.spectrum(A, tol)
    Ac = _as_complex(A)
    n = Ac.shape[0]
    projectors, rights, lefts = [], [], []
    for rec in spec:
        V_R, _ = numlinalg.generalized_eigenspace(Ac, rec.value, rec.multiplicity, tol)
        V_L, _ = numlinalg.generalized_eigenspace(
            Ac, rec.value, rec.multiplicity, tol, left=True
        )
        rights.append(V_R)
        lefts.append(V_L)
        projectors.append(spectral_projector(Ac, rec.value, V_R, V_L))
    exact = None
    if integer and all(
        r.value.imag == 0 and r.value.real == round(r.value.real) for r in spec
    ):
        snapped = [snap_rational(E) for E in projectors]
        if all(s is not None for s in snapped):
            exact = tuple(snapped)
            projectors = [np.array(s, dtype=float).astype(complex) for s in snapped]
    eye = np.eye(n)
    A_D = sum((r.value * E for r, E in zip(spec, projectors)), np.zeros((n, n), complex))
    A_N = sum(((Ac - r.value * eye) @ E for r, E in zip(spec, projectors)), np.zeros((n, n), complex))
    return SpectralDecomposition(
        Ac, spec, tuple(projectors), tuple(rights), tuple(lefts), A_D, A_N, exact
    )


def jordan_chevalley_split(A, dec):
    """``(A_D, A_N)`` with ``A_D = sum lambda E`` and ``A_N = sum (A - lambda I) E``."""
    return dec.A_D, dec.A_N


# -- closed forms ---------------------------------------------------------


def _lam_power(lam, e):
    """``lam**e`` with ``0**e = 1`` for ``e <= 0``."""
    if lam == 0:
        return 1.0 if e <= 0 else 0.0
    return lam**e


def binomial_poly(j):
    """Ascending monomial coefficients of ``C(x, j)``."""
    if j == 0:
        return np.array([1.0])
    c = npoly.polyfromroots(np.arange(j))
    return c / float(np.prod(np.arange(1, j + 1)))


@dataclass(frozen=True)
class ClosedForm:
    """``A^n = sum_lambda sum_j C(n, j) lambda^(n-j) M_j``."""

    terms: tuple  # ((lambda, (M_0, ..., M_{nu-1})), ...)

    def evaluate(self, n):
        out = None
        for lam, mats in self.terms:
            for j, M in enumerate(mats):
                if j > n:
                    break
                term = comb(n, j) * _lam_power(lam, n - j) * M
                out = term if out is None else out + term
        return out

    def to_json(self):
        return {
            "terms": [
                {
                    "eigenvalue": complex_json(lam),
                    "matrices": [
                        [[[float(x.real), float(x.imag)] for x in row] for row in M]
                        for M in mats
                    ],
                }
                for lam, mats in self.terms
            ]
        }


def power_expansion(A, dec):
    """Closed form of ``A^n`` with coefficient matrices ``(A - lambda I)^j E``."""
    Ac = _as_complex(A)
    eye = np.eye(Ac.shape[0])
    terms = []
    for rec, E in dec:
        B = Ac - rec.value * eye
        mats = []
        M = E
        for _ in range(rec.index):
            mats.append(M)
            M = B @ M
        terms.append((rec.value, tuple(mats)))
    return ClosedForm(tuple(terms))


@dataclass(frozen=True)
class ScalarClosedForm:
    """``f(m) = sum_lambda sum_j C(m, j) lambda^(m-j) s_j``.

    For nonzero ``lambda`` the inner sum is ``lambda^m p_lambda(m)``; see
    :meth:`polynomial`. Zero eigenvalues only contribute at ``m < nu(0)``.
    """

    terms: tuple  # ((lambda, (s_0, ..., s_{nu-1})), ...)

    def evaluate(self, m):
        total = 0j
        for lam, coeffs in self.terms:
            for j, s in enumerate(coeffs):
                if j > m:
                    break
                total += comb(m, j) * _lam_power(lam, m - j) * s
        return total

    def count(self, m):
        return int(round(self.evaluate(m).real))

    def polynomial(self, lam, tol=1e-8):
        """Monomial coefficients of ``p_lambda`` (ascending) for nonzero ``lambda``."""
        for value, coeffs in self.terms:
            if abs(value - lam) <= tol * max(1.0, abs(lam)):
                if value == 0:
                    raise ValueError("the zero eigenvalue has no exponential-polynomial term")
                p = np.zeros(len(coeffs), dtype=complex)
                for j, s in enumerate(coeffs):
                    bp = binomial_poly(j) * s / value**j
                    p[: len(bp)] += bp
                return p
        raise KeyError(f"{lam} is not an eigenvalue")

    def to_json(self):
        terms = []
        for lam, coeffs in self.terms:
            entry = {
                "eigenvalue": complex_json(lam),
                "binomial_coefficients": [complex_json(s) for s in coeffs],
            }
            if lam != 0:
                entry["polynomial"] = [complex_json(c) for c in self.polynomial(lam)]
            terms.append(entry)
        return {"terms": terms}


def complex_json(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def structure_closed_form(sys, tol=DEFAULT_TOL, dec=None):
    """Closed form of the structure function of an automaton system."""
    from .digraph import adjacency_matrix

    A = adjacency_matrix(sys.digraph)
    if dec is None:
        dec = decompose(A, tol)
    cf = power_expansion(A, dec)
    vi = sys.v_initial.astype(complex)
    vf = sys.v_final.astype(complex)
    return ScalarClosedForm(
        tuple((lam, tuple(complex(vi @ M @ vf) for M in mats)) for lam, mats in cf.terms)
    )


# -- dominant behaviour ---------------------------------------------------


@dataclass(frozen=True)
class DominantTerm:
    rho: float
    nu: int
    T: tuple  # dominant eigenvalues of maximal index
    E_hat: tuple  # aligned with T
    S: tuple  # all dominant eigenvalues
    ranks: tuple  # rank of each E_hat; 0 signals a tolerance failure

    def limit(self, n):
        """``sum_{lambda in T} (lambda/rho)^(n - nu + 1) E_hat``."""
        e = n - self.nu + 1
        return sum((lam / self.rho) ** e * E for lam, E in zip(self.T, self.E_hat))

    def residual(self, A, n):
        """Max-row-sum norm of ``A^n / (C(n, nu-1) rho^(n-nu+1))`` minus the limit."""
        scaled = scaled_power(A, n, self.nu, self.rho)
        return float(np.linalg.norm(scaled - self.limit(n), np.inf))


def scaled_power(A, n, nu, rho):
    """``A^n / (C(n, nu-1) rho^(n-nu+1))``, exact powers for integer A."""
    denom_c = comb(n, nu - 1)
    if _is_integer_matrix(A):
        from .digraph import int_matrix_power

        P = int_matrix_power(np.asarray(A, dtype=object).tolist(), n)
        rho_int = round(rho)
        if abs(rho - rho_int) == 0 and rho_int > 0:
            den = denom_c * rho_int ** (n - nu + 1)
            return np.array([[x / den for x in row] for row in P], dtype=complex)
        return np.array(
            [[float(x) / denom_c / rho ** (n - nu + 1) for x in row] for row in P],
            dtype=complex,
        )
    Ac = _as_complex(A) / rho
    return np.linalg.matrix_power(Ac, n) * rho ** (nu - 1) / denom_c


def dominant_eigenvalues(spec, tol=DOMINANT_TOL):
    rho = max(abs(r.value) for r in spec)
    return rho, [r for r in spec if abs(r.value) >= rho * (1 - tol)]


def dominant_term(A, dec, tol=DOMINANT_TOL):
    """Dominant eigenvalues of maximal index and their limit matrices.

    ``E_hat = (A - lambda I)^(nu - 1) E_lambda`` is the coefficient of
    ``C(n, nu-1) lambda^(n-nu+1)`` in ``A^n``.
    """
    rho, S = dominant_eigenvalues(dec.spectrum, tol)
    if rho == 0:
        raise InputError("nilpotent: all walks die out")
    nu = max(r.index for r in S)
    T = [r for r in S if r.index == nu]
    Ac = dec.matrix
    eye = np.eye(Ac.shape[0])
    E_hat = []
    ranks = []
    for r in T:
        E = dec.projector(r.value)
        Eh = _mpow(Ac - r.value * eye, nu - 1) @ E
        E_hat.append(Eh)
        ranks.append(numlinalg.rank(Eh) if np.any(np.abs(Eh) > 0) else 0)
    return DominantTerm(
        float(rho),
        nu,
        tuple(r.value for r in T),
        tuple(E_hat),
        tuple(r.value for r in S),
        tuple(ranks),
    )


def eigenvector_factorization(E_hat, A, lam, tol=DEFAULT_TOL, check_tol=1e-8):
    """Rank factorization ``E_hat = sum u_R u_L`` into right/left eigenvectors.

    Right factors are pivot columns of ``E_hat`` (largest-modulus entry
    scaled to 1); left factors solve the remaining least-squares system.
    """
    E_hat = np.asarray(E_hat, dtype=complex)
    Ac = _as_complex(A)
    if not np.any(np.abs(E_hat) > 0):
        return []
    _, R, piv = scipy.linalg.qr(E_hat, pivoting=True)
    diag = np.abs(np.diag(R))
    r = int(np.sum(diag > tol * diag[0]))
    C = E_hat[:, piv[:r]]
    X = np.linalg.lstsq(C, E_hat, rcond=None)[0]
    B = Ac - lam * np.eye(Ac.shape[0])
    scale = np.linalg.norm(Ac, 2) + abs(lam)
    pairs = []
    for j in range(r):
        u_r = C[:, j].copy()
        u_l = X[j, :].copy()
        s = u_r[np.argmax(np.abs(u_r))]
        u_r /= s
        u_l *= s
        if np.linalg.norm(B @ u_r) > check_tol * scale * np.linalg.norm(u_r):
            raise RuntimeError(f"right factor {j} is not a {lam}-eigenvector")
        if np.linalg.norm(u_l @ B) > check_tol * scale * np.linalg.norm(u_l):
            raise RuntimeError(f"left factor {j} is not a {lam}-eigenvector")
        pairs.append((u_r, u_l))
    return pairs


@dataclass(frozen=True)
class ResiduePolynomials:
    """``(A/rho)^(P m + k) - S_k(P m + k) -> 0`` with matrix polynomials ``S_k``."""

    P: int
    rho: float
    coefficients: tuple  # per k: array (deg+1, n, n), ascending powers of x

    def evaluate(self, k, x):
        C = self.coefficients[k]
        return sum(C[d] * float(x) ** d for d in range(C.shape[0]))


def component_spectral_radius(D, component, tol=DEFAULT_TOL):
    sub = induced(D, component)
    p = numlinalg.char_poly(sub.matrix)
    vals = numlinalg.eigenvalues(p)
    return max((abs(v) for v, _ in vals), default=0.0)


def dominant_components(D, rho, tol=DOMINANT_TOL):
    """Irreducible components whose spectral radius equals ``rho``."""
    out = []
    for comp in irreducible_components(D):
        if not has_internal_arc(D, comp):
            continue
        if component_spectral_radius(D, comp) >= rho * (1 - tol):
            out.append(comp)
    return out


def _root_of_unity_order(z, limit, tol=1e-8):
    for q in range(1, limit + 1):
        if abs(z**q - 1) <= tol:
            return q
    raise NumericalError(f"{z} is not a root of unity of order <= {limit}")


def residue_polynomials(A, dec, tol=DOMINANT_TOL):
    """Period ``P`` and matrix polynomials ``S_0..S_{P-1}`` for nonnegative ``A``."""
    Aobj = np.asarray(A, dtype=object)
    if any(x < 0 for x in Aobj.flat):
        raise InputError("residue polynomials need a nonnegative matrix")
    rho, S = dominant_eigenvalues(dec.spectrum, tol)
    if rho == 0:
        raise InputError("nilpotent: all walks die out")
    D = from_matrix(Aobj.tolist())
    P = 1
    for comp in dominant_components(D, rho, tol):
        P = lcm(P, period(D, comp).period)
    n = dec.n
    for r in S:
        P = lcm(P, _root_of_unity_order(r.value / rho, max(n, 1)))
    cf = power_expansion(dec.matrix, dec)
    dominant = [(lam, mats) for lam, mats in cf.terms if abs(lam) >= rho * (1 - tol)]
    deg = max(len(mats) for _, mats in dominant)
    coefficients = []
    for k in range(P):
        C = np.zeros((deg, n, n), dtype=complex)
        for lam, mats in dominant:
            phase = (lam / rho) ** k
            for j, M in enumerate(mats):
                bp = binomial_poly(j)
                for d, b in enumerate(bp):
                    C[d] += phase * b * M / lam**j
        coefficients.append(C)
    return ResiduePolynomials(P, float(rho), tuple(coefficients))
