"""Invariant checks shared by ``walkcount validate`` and the test suite.

Every check returns :class:`Check` records that carry the measured error
and the tolerance they were judged against, so reports never state a
numeric claim without its tolerance.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import numlinalg, pseudoinverse, spectral, symdyn
from .digraph import adjacency_matrix, count_walks, int_matrix_power, power

PROJECTOR_TOL = 1e-6
CLOSED_FORM_TOL = 1e-8
STRUCTURE_TOL = 1e-8
GROWTH_TOL = 1e-6
NONNEG_TOL = 1e-10


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    error: float
    tol: float
    detail: str = ""

    def to_json(self):
        d = asdict(self)
        d["passed"] = bool(d["passed"])
        d["error"] = float(d["error"])
        return d

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{mark}  {self.name}: error {self.error:.3g} <= {self.tol:g}{extra}"


def _check(name, error, tol, detail=""):
    error = float(error)
    return Check(name, bool(error <= tol), error, tol, detail)


def _norm(M):
    return float(np.linalg.norm(M, 2)) if np.size(M) else 0.0


def _lam(z):
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}i"


# -- projectors -----------------------------------------------------------------


def projector_checks(A, dec, tol=PROJECTOR_TOL):
    """Idempotence, orthogonality, resolution of identity, commutation,
    rank equal to multiplicity, annihilation by ``(A - lambda I)^nu`` and
    agreement with the interpolation-polynomial construction."""
    Ac = dec.matrix
    n = dec.n
    eye = np.eye(n)
    out = []
    pairs = list(dec)
    total = np.zeros((n, n), complex)
    for rec, E in pairs:
        tag = _lam(rec.value)
        nE = max(1.0, _norm(E))
        total += E
        out.append(_check(f"E[{tag}] idempotent", _norm(E @ E - E) / nE**2, tol))
        out.append(
            _check(f"E[{tag}] commutes with A", _norm(Ac @ E - E @ Ac) / (max(1.0, _norm(Ac)) * nE), tol)
        )
        r = numlinalg.rank(E, 1e-8)
        out.append(
            Check(f"E[{tag}] rank equals multiplicity", r == rec.multiplicity, abs(r - rec.multiplicity), 0, f"rank {r}, m {rec.multiplicity}")
        )
        B = Ac - rec.value * eye
        Bn = np.linalg.matrix_power(B, rec.index)
        scale = max(1.0, _norm(B)) ** rec.index * nE
        out.append(_check(f"(A - {tag} I)^{rec.index} E[{tag}] = 0", _norm(Bn @ E) / scale, tol))
    for a, (ra, Ea) in enumerate(pairs):
        for b, (rb, Eb) in enumerate(pairs):
            if a != b:
                scale = max(1.0, _norm(Ea) * _norm(Eb))
                out.append(
                    _check(f"E[{_lam(ra.value)}] E[{_lam(rb.value)}] = 0", _norm(Ea @ Eb) / scale, tol)
                )
    scale = max(1.0, sum(_norm(E) for _, E in pairs))
    out.append(_check("sum of projectors = I", _norm(total - eye) / scale, tol))
    poly = spectral.spectral_projector_poly(Ac, dec.spectrum)
    for (rec, E), P in zip(pairs, poly):
        err = _norm(E - P) / max(1.0, _norm(E))
        out.append(_check(f"E[{_lam(rec.value)}] outerproduct vs polynomial", err, tol))
    return out


def closed_form_checks(A, dec, nmax=12, tol=CLOSED_FORM_TOL):
    """``ClosedForm`` evaluation against exact integer powers, ``n <= nmax``."""
    cf = spectral.power_expansion(A, dec)
    rows = np.asarray(A, dtype=object).tolist()
    worst = 0.0
    for n in range(nmax + 1):
        exact = np.array(int_matrix_power(rows, n), dtype=float)
        err = np.max(np.abs(cf.evaluate(n) - exact)) / max(1.0, np.max(np.abs(exact)))
        worst = max(worst, err)
    return [_check(f"closed form of A^n matches exact powers for n <= {nmax}", worst, tol)]


def oracle_checks(sys, depth, scf=None):
    """Rounded scalar closed form against the walk-counting oracle."""
    if scf is None:
        scf = spectral.structure_closed_form(sys)
    mismatches = [m for m in range(depth + 1) if scf.count(m) != count_walks(sys.digraph, sys.initial, sys.final, m)]
    detail = f"first mismatch at m={mismatches[0]}" if mismatches else ""
    return [Check(f"rounded closed form equals walk count for m <= {depth}", not mismatches, len(mismatches), 0, detail)]


# -- pseudo-inverses ---------------------------------------------------------------


def _zero_index(dec):
    for rec in dec.spectrum:
        if rec.value == 0:
            return rec.index
    return 0


def drazin_checks(A, dec, tol=CLOSED_FORM_TOL):
    Ac = dec.matrix
    n = dec.n
    X = pseudoinverse.drazin(A, dec)
    k = _zero_index(dec)
    scale = max(1.0, _norm(Ac)) * max(1.0, _norm(X))
    Ak = np.linalg.matrix_power(Ac, k)
    out = [
        _check("Drazin: X A X = X", _norm(X @ Ac @ X - X) / (scale * max(1.0, _norm(X))), tol),
        _check("Drazin: A X = X A", _norm(Ac @ X - X @ Ac) / scale, tol),
        _check(
            f"Drazin: A^{k + 1} X = A^{k}",
            _norm(Ak @ Ac @ X - Ak) / (max(1.0, _norm(Ak)) * scale),
            tol,
        ),
    ]
    E0 = np.zeros((n, n), complex)
    for rec, E in dec:
        if rec.value == 0:
            E0 = E
    out.append(_check("I - A A^D = E[0]", _norm(np.eye(n) - Ac @ X - E0) / scale, tol))
    return out


def adjugate_checks(A, dec, tol=CLOSED_FORM_TOL):
    exact = np.array(pseudoinverse.adjugate(A), dtype=complex)
    spec = pseudoinverse.adjugate_spectral(A, dec)
    err = _norm(spec - exact) / max(1.0, _norm(exact))
    return [_check("spectral adjugate matches cofactor transpose", err, tol)]


# -- symbolic dynamics ---------------------------------------------------------------


def mask_checks(D, structure, masks, tol=STRUCTURE_TOL):
    """Class separation, eigen-equations on the full power, rotation law,
    nonnegativity and normalization of every masked pair."""
    A = np.array(adjacency_matrix(D), dtype=float)
    rho = structure.rho
    out = []
    for i, pairs in enumerate(masks):
        p = structure.periods[i]
        classes = structure.classes[i]
        Ap = np.array(adjacency_matrix(power(D, p)), dtype=float)
        lam = rho**p
        for j, pair in enumerate(pairs):
            tag = f"[{i + 1},{j + 1}]"
            clash = [
                (j2 + 1, sorted(classes[j] & pairs[j2].V))
                for j2 in range(p)
                if j2 != j and classes[j] & pairs[j2].V
            ]
            out.append(
                Check(f"class {tag} disjoint from other masks", not clash, len(clash), 0, str(clash) if clash else "")
            )
            sL = max(1.0, np.linalg.norm(pair.v_L)) * lam
            sR = max(1.0, np.linalg.norm(pair.v_R)) * lam
            out.append(_check(f"v_L{tag} A^{p} = rho^{p} v_L", np.linalg.norm(pair.v_L @ Ap - lam * pair.v_L) / sL, tol))
            out.append(_check(f"A^{p} v_R{tag} = rho^{p} v_R", np.linalg.norm(Ap @ pair.v_R - lam * pair.v_R) / sR, tol))
            nxt = pairs[(j + 1) % p]
            err = np.linalg.norm(pair.v_L @ A - rho * nxt.v_L) / (max(1.0, np.linalg.norm(pair.v_L)) * rho)
            out.append(_check(f"rotation law v_L{tag} A = rho v_L[next]", err, tol))
            low = min(float(np.min(pair.v_L)), float(np.min(pair.v_R)))
            out.append(_check(f"masked pair {tag} nonnegative", max(0.0, -low), NONNEG_TOL))
            out.append(_check(f"v_L{tag} v_R{tag} = 1", abs(pair.product - 1), tol))
    return out


def convergence_depth(dec, structure, target=1e-10, lo=20, hi=2000):
    """Smallest m (within [lo, hi]) with ``r^(P m) <= target`` plus n, where r
    is the largest non-peripheral ``|lambda| / rho``; polynomial factors from
    eigenvalue indices are covered by the extra n steps."""
    rho = structure.rho
    inner = [abs(r.value) / rho for r in dec.spectrum if abs(r.value) < rho * (1 - 1e-9)]
    r = max(inner, default=0.0)
    if r == 0:
        return lo
    m = int(np.ceil(np.log(target) / (structure.P * np.log(r)))) + dec.n
    return int(min(max(m, lo), hi))


def growth_checks(sys, structure, masks, m=20, tol=GROWTH_TOL):
    """``|f(Pm + k) / rho^(Pm + k) - c_k|`` for each residue k."""
    out = []
    for k in range(structure.P):
        c = symdyn.growth_coefficients(sys, structure, k, masks)
        length = structure.P * m + k
        f = count_walks(sys.digraph, sys.initial, sys.final, length)
        err = abs(f / structure.rho**length - c)
        out.append(_check(f"f({structure.P}m+{k}) / rho^({structure.P}m+{k}) -> c_{k} = {c:.6g} at m={m}", err, tol))
    return out


def support_checks(D, dec, tol=1e-9):
    """Witness paths for every computed generalized eigenvector, both sides,
    plus the last-component restriction property for right vectors."""
    out = []
    for rec, V_R, V_L in zip(dec.spectrum, dec.right_bases, dec.left_bases):
        tag = _lam(rec.value)
        for side, vectors in (("right", V_R.T), ("left", V_L)):
            failures = []
            for v in vectors:
                report = symdyn.support_reachability_check(D, v, rec.value, side, tol)
                failures += [w.vertex for w in report.witnesses if not w.passed]
            out.append(
                Check(
                    f"{side} generalized {tag}-eigenvectors: support paths",
                    not failures,
                    len(failures),
                    0,
                    f"unwitnessed coordinates {failures}" if failures else "",
                )
            )
        worst = 0.0
        ok = True
        for v in V_R.T:
            report = symdyn.component_restriction_check(D, v, rec.value, rec.index)
            ok &= bool(report.passed)
            worst = max(worst, report.residual)
        out.append(
            Check(f"right generalized {tag}-eigenvectors: component restriction", ok, worst, STRUCTURE_TOL)
        )
    return out
