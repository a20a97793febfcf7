"""Drazin inverse, adjugates and the spectral formulas that produce them."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError
from .numlinalg import DEFAULT_TOL


def _power(M, k):
    return np.linalg.matrix_power(M, k) if k else np.eye(M.shape[0], dtype=M.dtype)


def drazin(A, dec):
    """``A^D = sum_{lambda != 0} lambda^-1 sum_{i < nu} (I - A/lambda)^i E_lambda``."""
    Ac = dec.matrix
    n = Ac.shape[0]
    eye = np.eye(n)
    out = np.zeros((n, n), dtype=complex)
    for rec, E in dec:
        lam = rec.value
        if lam == 0:
            continue
        B = eye - Ac / lam
        term = E.copy()
        for _ in range(rec.index):
            out += term / lam
            term = B @ term
    return out


def inverse_spectral(A, dec):
    """Inverse of a nonsingular matrix from its spectral projectors."""
    if any(rec.value == 0 for rec in dec.spectrum):
        raise InputError("singular: 0 is an eigenvalue")
    return drazin(A, dec)


def adjugate_spectral(A, dec):
    """Adjugate from the spectral projectors (with ``0**0 = 1``).

    Each eigenvalue contributes
    ``prod_{mu != lambda} mu^m(mu) * lambda^(m-1-i) (lambda I - A)^i E`` for
    ``i < nu(lambda)``.
    """
    Ac = dec.matrix
    n = Ac.shape[0]
    eye = np.eye(n)
    recs = list(dec.spectrum)
    out = np.zeros((n, n), dtype=complex)
    for rec, E in dec:
        lam = rec.value
        others = 1 + 0j
        for r in recs:
            if r is not rec:
                others *= r.value**r.multiplicity
        if others == 0:
            continue
        B = lam * eye - Ac
        term = E.copy()
        for i in range(rec.index):
            e = rec.multiplicity - 1 - i
            coeff = 1.0 if (lam == 0 and e == 0) else (0.0 if lam == 0 else lam**e)
            out += others * coeff * term
            term = B @ term
    return out


# -- exact cofactors --------------------------------------------------------


def bareiss_det(M):
    """Determinant by fraction-free elimination; exact for int or Fraction entries."""
    M = [list(row) for row in M]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                M[i][j] = num // prev if isinstance(num, int) and isinstance(prev, int) else num / prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _exact(M):
    M = np.asarray(M, dtype=object)
    return all(isinstance(x, (int, np.integer, Fraction)) for x in M.flat)


def _minor(M, i, j):
    return [[x for c, x in enumerate(row) if c != j] for r, row in enumerate(M) if r != i]


def cofactor(M):
    """Cofactor matrix; exact (Bareiss per minor) for integer/Fraction input."""
    if _exact(M):
        rows = [[x if isinstance(x, Fraction) else int(x) for x in row] for row in np.asarray(M, dtype=object)]
        n = len(rows)
        if n == 1:
            return np.array([[1]], dtype=object)
        C = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                C[i, j] = (-1) ** (i + j) * bareiss_det(_minor(rows, i, j))
        return C
    Mc = np.asarray(M, dtype=complex)
    n = Mc.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    C = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            sub = np.delete(np.delete(Mc, i, axis=0), j, axis=1)
            C[i, j] = (-1) ** (i + j) * np.linalg.det(sub)
    return C


def adjugate(M):
    return cofactor(M).T


# -- extended elementary factorization ---------------------------------------


@dataclass(frozen=True)
class ElementaryFactor:
    kind: str  # "row_add", "row_scale" or "row_swap"
    i: int
    j: int = None
    c: complex = None

    def __post_init__(self):
        if self.kind in ("row_add", "row_swap") and self.i == self.j:
            raise ValueError(f"{self.kind} needs two distinct rows")

    def matrix(self, n):
        E = np.eye(n, dtype=complex)
        if self.kind == "row_add":
            E[self.i, self.j] = self.c
        elif self.kind == "row_scale":
            E[self.i, self.i] = self.c
        elif self.kind == "row_swap":
            E[[self.i, self.j]] = E[[self.j, self.i]]
        else:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        return E

    def inverse(self):
        if self.kind == "row_add":
            return ElementaryFactor("row_add", self.i, self.j, -self.c)
        if self.kind == "row_scale":
            return ElementaryFactor("row_scale", self.i, c=1 / self.c)
        return self


def factor_product(factors, n):
    out = np.eye(n, dtype=complex)
    for f in factors:
        out = out @ f.matrix(n)
    return out


def _invertible_factors(M):
    """Elementary factors F_1..F_t with F_1 ... F_t = M for invertible M."""
    W = np.array(M, dtype=complex)
    n = W.shape[0]
    ops = []  # ops applied on the left, in order: E_t ... E_1 W = I

    def apply(op):
        nonlocal W
        W = op.matrix(n) @ W
        ops.append(op)

    for k in range(n):
        p = k + int(np.argmax(np.abs(W[k:, k])))
        if p != k:
            apply(ElementaryFactor("row_swap", k, p))
        if W[k, k] != 1:
            apply(ElementaryFactor("row_scale", k, c=1 / W[k, k]))
        for i in range(n):
            if i != k and W[i, k] != 0:
                apply(ElementaryFactor("row_add", i, k, -W[i, k]))
    # M = E_1^-1 E_2^-1 ... E_t^-1
    return [op.inverse() for op in ops]


def elementary_factorization(M, tol=DEFAULT_TOL):
    """Factor any square matrix into extended elementary matrices.

    A maximal independent set of rows is completed to a basis with unit
    vectors; the resulting invertible matrix is factored by Gauss-Jordan
    elimination, then the completion rows are scaled by zero and the
    dependent rows rebuilt by row additions.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    scale = max(np.linalg.norm(M, 2), 1.0)
    independent = []
    for r in range(n):
        trial = M[independent + [r]]
        if np.linalg.matrix_rank(trial, tol=tol * scale) == len(independent) + 1:
            independent.append(r)
    basis = M.copy()
    chosen = M[independent]
    completion = {}
    for r in range(n):
        if r in independent:
            continue
        for k in range(n):
            unit = np.zeros(n, dtype=complex)
            unit[k] = 1
            if k in completion.values():
                continue
            trial = np.vstack([chosen, unit]) if chosen.size else unit[None, :]
            if np.linalg.matrix_rank(trial, tol=tol * scale) == trial.shape[0]:
                chosen = trial
                completion[r] = k
                basis[r] = unit
                break
    factors = _invertible_factors(basis)
    left = []  # applied to the left of the product, innermost first
    for r in sorted(completion):
        left.append(ElementaryFactor("row_scale", r, c=0))
    if independent:
        Ibasis = M[independent]
        for r in sorted(completion):
            coeffs = np.linalg.lstsq(Ibasis.T, M[r], rcond=None)[0]
            for src, c in zip(independent, coeffs):
                if abs(c) > 0:
                    left.append(ElementaryFactor("row_add", r, src, c))
    return list(reversed(left)) + factors


# -- resolvent ----------------------------------------------------------------


@dataclass(frozen=True)
class ResolventReport:
    eigenvalue: complex
    index: int
    errors: tuple
    decreasing: bool

    @property
    def final(self):
        return self.errors[-1]


def resolvent_limit_check(A, lam, dec, steps):
    """Distance of ``(x - lam)^nu (xI - A)^{-1}`` from ``(A - lam I)^(nu-1) E``.

    Evaluated at ``x_i = lam + 10^-i``; a sample that lands on another
    eigenvalue is nudged by ``(1 + i * 1e-3)``.
    """
    rec = dec.record(lam)
    E = dec.projector(lam)
    Ac = dec.matrix
    n = Ac.shape[0]
    eye = np.eye(n)
    target = _power(Ac - rec.value * eye, rec.index - 1) @ E
    eigs = [r.value for r in dec.spectrum]
    errors = []
    for i in range(1, steps + 1):
        h = 10.0**-i
        x = rec.value + h
        while any(abs(x - mu) < 0.5 * h for mu in eigs if mu != rec.value):
            h *= 1 + i * 1e-3
            x = rec.value + h
        delta = x - rec.value
        R = np.linalg.solve(x * eye - Ac, eye)
        errors.append(float(np.linalg.norm(delta**rec.index * R - target, np.inf)))
    decreasing = all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(errors, errors[1:]))
    return ResolventReport(rec.value, rec.index, tuple(errors), decreasing)
