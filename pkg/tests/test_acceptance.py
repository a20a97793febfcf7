"""Acceptance criteria, each run at its stated tolerance and time budget.

Run with pytest (a summary block is printed at the end of the session) or
directly with ``python tests/test_acceptance.py`` for one line per criterion.
"""

import contextlib
import io
import json
import os
import random
import sys
import time
import warnings
from fractions import Fraction as F

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from walkcount import checks, pseudoinverse, spectral, symdyn  # noqa: E402
from walkcount.cli import main as cli_main  # noqa: E402
from walkcount.digraph import count_walks, from_matrix  # noqa: E402
from walkcount.regex import AutomatonSystem, compile_regex  # noqa: E402

WORKED_REGEX = "a*ba*b(a|b)*"
PROJ_MATRIX = [[2, 1, 1, 0], [0, 2, 0, 0], [0, 0, 0, 1], [0, 0, 4, 0]]
GROWTH_MATRIX = [
    [0, 1, 2, 0, 1],
    [0, 2, 0, 0, 0],
    [0, 0, 0, 2, 0],
    [0, 0, 2, 0, 1],
    [0, 0, 0, 0, 0],
]
E_PLUS = [[1, 0, F(1, 8), F(-1, 16)], [0, 1, 0, 0], [0, 0, F(1, 2), F(1, 4)], [0, 0, 1, F(1, 2)]]
E_MINUS = [[0, 0, F(-1, 8), F(1, 16)], [0, 0, 0, 0], [0, 0, F(1, 2), F(-1, 4)], [0, 0, -1, F(1, 2)]]

RESULTS = {}


class Criterion:
    """Collects named sub-checks and the wall time of one criterion."""

    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.items = []
        self.elapsed = None

    def check(self, label, passed, detail=""):
        self.items.append((label, bool(passed), detail))

    def extend(self, results, prefix=""):
        for c in results:
            self.check(prefix + c.name, c.passed, f"error {c.error:.3g}, tol {c.tol:g}")

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.items) and self.elapsed < self.budget

    def failures(self):
        out = [f"{label}: {detail}" for label, ok, detail in self.items if not ok]
        if self.elapsed >= self.budget:
            out.append(f"runtime {self.elapsed:.2f} s >= {self.budget} s")
        return out

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return (
            f"[{mark}] criterion {self.number}: {self.title} "
            f"({len(self.items)} checks, {self.elapsed:.2f} s of {self.budget} s)"
        )


def summary_lines():
    lines = []
    for number in sorted(RESULTS):
        c = RESULTS[number]
        lines.append(c.line())
        lines += [f"        failed: {f}" for f in c.failures()]
    return lines


def run_criterion(number, title, budget, body):
    crit = Criterion(number, title, budget)
    start = time.perf_counter()
    body(crit)
    crit.elapsed = time.perf_counter() - start
    RESULTS[number] = crit
    return crit


def _assert(crit):
    assert crit.passed, "\n".join(crit.failures())


# -- shared corpora -------------------------------------------------------------------


def random_matrix_corpus(count=50, seed=20240601):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 7))
        out.append(rng.integers(0, 4, size=(n, n)).astype(int).tolist())
    return out


def random_regex_corpus(count=20, seed=7):
    rng = random.Random(seed)
    return [oracles.random_regex(rng, depth=4) for _ in range(count)]


def _decompose(M):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return spectral.decompose(np.array(M))


# -- criterion bodies ---------------------------------------------------------------


def worked_regex(crit):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(["analyze", "--regex", WORKED_REGEX, "--json"])
    crit.check("analyze exits 0", code == 0, f"exit {code}")
    report = json.loads(buf.getvalue())
    forms = {t["eigenvalue"]: t.get("polynomial") for t in report["closed_form"]}
    crit.check("nonzero eigenvalues are exactly 2 and 1", sorted(k for k in forms if k != 0) == [1.0, 2.0], str(forms))
    c = forms.get(2.0) or [np.nan]
    p1 = forms.get(1.0) or [np.nan, np.nan]
    crit.check("coefficient c of 2^m is 1", len(c) == 1 and abs(c[0] - 1) <= 1e-9, str(c))
    crit.check("coefficient a of m 1^m is -1", len(p1) == 2 and abs(p1[1] + 1) <= 1e-9, str(p1))
    crit.check("coefficient b of 1^m is -1", abs(p1[0] + 1) <= 1e-9, str(p1))
    sys_ = compile_regex(WORKED_REGEX)
    scf = spectral.structure_closed_form(sys_)
    bad = [m for m in range(31) if scf.count(m) != count_walks(sys_.digraph, sys_.initial, sys_.final, m)]
    crit.check("rounded closed form equals walk count for m <= 30", not bad, f"mismatches at {bad}")


def projector_example(crit):
    dec = spectral.decompose(np.array(PROJ_MATRIX))
    exact = dec.exact_projectors
    crit.check("projectors snap to rationals", exact is not None)
    for lam, expected in ((2, E_PLUS), (-2, E_MINUS)):
        E = dec.projector(lam)
        err = float(np.max(np.abs(E - np.array(expected, dtype=float))))
        crit.check(f"E[{lam}] entrywise within 1e-9", err <= 1e-9, f"max error {err:.3g}")
        if exact is not None:
            k = [r.value for r in dec.spectrum].index(lam)
            crit.check(f"E[{lam}] exact after snapping", exact[k] == expected)
    dom = spectral.dominant_term(PROJ_MATRIX, dec)
    E_hat = np.zeros((4, 4))
    E_hat[0] = [0, 1, 0.5, 0.25]
    crit.check("dominant rho = 2, nu = 2", (dom.rho, dom.nu) == (2.0, 2))
    crit.check("E_hat has first row (0, 1, 1/2, 1/4)", np.max(np.abs(dom.E_hat[0] - E_hat)) <= 1e-9)
    scaled = spectral.scaled_power(PROJ_MATRIX, 60, 2, 2.0)
    resid = float(np.linalg.norm(scaled - E_hat, np.inf))
    crit.check("||A^60 / (C(60,1) 2^59) - E_hat||_inf <= 1e-6", resid <= 1e-6, f"norm {resid:.6g}")
    pairs = spectral.eigenvector_factorization(dom.E_hat[0], PROJ_MATRIX, 2)
    crit.check("exactly one eigenvector pair", len(pairs) == 1, f"{len(pairs)} pairs")
    if len(pairs) == 1:
        r, l = pairs[0]
        s = r[0]
        ok = abs(s) > 0 and np.allclose(r / s, [1, 0, 0, 0], atol=1e-9) and np.allclose(
            l * s, [0, 1, 0.5, 0.25], atol=1e-9
        )
        crit.check("pair matches (1,0,0,0)^T (0,1,1/2,1/4) up to reciprocal scaling", ok)


def growth_example(crit):
    D = from_matrix(GROWTH_MATRIX)
    sys_ = AutomatonSystem(D, frozenset({1}), frozenset({2, 3, 5}))
    st = symdyn.dominant_structure(D)
    c0 = symdyn.growth_coefficients(sys_, st, 0)
    c1 = symdyn.growth_coefficients(sys_, st, 1)
    crit.check("c_0 = 1/2 within 1e-9", abs(c0 - 0.5) <= 1e-9, f"c_0 = {c0!r}")
    crit.check("c_1 = 2 within 1e-9", abs(c1 - 2) <= 1e-9, f"c_1 = {c1!r}")
    f40 = count_walks(D, sys_.initial, sys_.final, 40)
    f41 = count_walks(D, sys_.initial, sys_.final, 41)
    crit.check("|f(40)/2^40 - 1/2| <= 1e-6", abs(F(f40, 2**40) - F(1, 2)) <= 1e-6)
    crit.check("|f(41)/2^41 - 2| <= 1e-6", abs(F(f41, 2**41) - 2) <= 1e-6)
    masks = [symdyn.class_masks(D, st, i) for i in range(st.s)]
    got = [pair.V for pairs in masks for pair in pairs]
    crit.check("masks V = {1,2}, {3,5}, {1,4}", got == [{1, 2}, {3, 5}, {1, 4}], str([sorted(v) for v in got]))
    expected = [
        ([0, 1, 0, 0, 0], [0.5, 1, 0, 0, 0]),
        ([0, 0, 1, 0, 0.5], [0, 0, 1, 0, 0]),
        ([0, 0, 0, 1, 0], [1, 0, 0, 1, 0]),
    ]
    for (vl, vr), pair in zip(expected, [p for pairs in masks for p in pairs]):
        err = max(np.max(np.abs(pair.v_L - vl)), np.max(np.abs(pair.v_R - vr)))
        crit.check(f"masked pair on {sorted(pair.V)} within 1e-9", err <= 1e-9, f"max error {err:.3g}")


def projector_suite(crit):
    for k, M in enumerate(random_matrix_corpus()):
        crit.extend(checks.projector_checks(M, _decompose(M)), prefix=f"matrix {k}: ")


def expansion_suite(crit):
    for k, M in enumerate(random_matrix_corpus()):
        crit.extend(checks.closed_form_checks(M, _decompose(M), nmax=12), prefix=f"matrix {k}: ")
    for expr in random_regex_corpus():
        sys_ = compile_regex(expr)
        crit.extend(checks.oracle_checks(sys_, 20), prefix=f"regex {expr}: ")


def _rank_classes(corpus):
    classes = {"full": [], "n-1": [], "<=n-2": []}
    for M in corpus:
        n, r = len(M), int(np.linalg.matrix_rank(np.array(M, dtype=float)))
        key = "full" if r == n else ("n-1" if r == n - 1 else "<=n-2")
        classes[key].append(M)
    return classes


def pseudoinverse_suite(crit):
    corpus = random_matrix_corpus()
    deficient = [
        [[0, 1], [0, 0]],
        [[1, 2, 3], [2, 4, 6], [1, 1, 1]],
        [[1, 1, 1], [1, 1, 1], [1, 1, 1]],
        [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        [[2, 2, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0], [3, 3, 0, 0]],
    ]
    for k, M in enumerate(corpus + deficient):
        dec = _decompose(M)
        crit.extend(checks.drazin_checks(M, dec), prefix=f"matrix {k}: ")
    classes = _rank_classes(corpus + deficient)
    for key, group in classes.items():
        crit.check(f"adjugate corpus has {key} matrices", len(group) > 0)
        for M in group:
            crit.extend(checks.adjugate_checks(M, _decompose(M)), prefix=f"rank {key}: ")
    rng = np.random.default_rng(11)
    for _ in range(30):
        n = int(rng.integers(1, 5))
        A = rng.integers(-3, 4, size=(n, n)).astype(object)
        B = rng.integers(-3, 4, size=(n, n)).astype(object)
        lhs = pseudoinverse.cofactor(A.dot(B))
        rhs = pseudoinverse.cofactor(A).dot(pseudoinverse.cofactor(B))
        crit.check("cofactor(AB) = cofactor(A) cofactor(B) exactly", (lhs == rhs).all())
    for k, M in enumerate(corpus + deficient):
        factors = pseudoinverse.elementary_factorization(M)
        A = np.array(M, dtype=float)
        err = float(np.max(np.abs(pseudoinverse.factor_product(factors, len(M)) - A)))
        crit.check(f"matrix {k}: elementary factorization reconstructs", err <= 1e-8, f"error {err:.3g}")
    dec = spectral.decompose(np.array(PROJ_MATRIX))
    report = pseudoinverse.resolvent_limit_check(PROJ_MATRIX, 2, dec, 6)
    crit.check("resolvent limit at lambda = 2 below 1e-4", report.final <= 1e-4, f"final {report.final:.3g}")


def symdyn_suite(crit):
    D3 = from_matrix(GROWTH_MATRIX)
    st = symdyn.dominant_structure(D3)
    masks = [symdyn.class_masks(D3, st, i) for i in range(st.s)]
    crit.extend(checks.mask_checks(D3, st, masks), prefix="growth example: ")
    for name, D in (
        ("regex example", compile_regex(WORKED_REGEX).digraph),
        ("projector example", from_matrix(PROJ_MATRIX)),
        ("growth example", D3),
    ):
        dec = spectral.decompose(np.array(D.matrix))
        crit.extend(checks.support_checks(D, dec), prefix=f"{name}: ")


CRITERIA = [
    (1, "worked regex closed form 2^m - m - 1", 1.0, worked_regex),
    (2, "projectors and dominant term of the 4-vertex example", 1.0, projector_example),
    (3, "growth coefficients and masks of the 5-vertex example", 1.0, growth_example),
    (4, "projector axioms on 50 random matrices", 10.0, projector_suite),
    (5, "power expansion and scalar closed form against oracles", 30.0, expansion_suite),
    (6, "Drazin inverse, adjugate, factorization and resolvent", 20.0, pseudoinverse_suite),
    (7, "periodic-class masks and eigenvector supports", 10.0, symdyn_suite),
]


@pytest.mark.parametrize("number,title,budget,body", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, budget, body):
    _assert(run_criterion(number, title, budget, body))


if __name__ == "__main__":
    for entry in CRITERIA:
        run_criterion(*entry)
    print("\n".join(summary_lines()))
    sys.exit(0 if all(c.passed for c in RESULTS.values()) else 1)
