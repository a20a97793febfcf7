"""Command-line front end: ``walkcount <subcommand> (--regex | --digraph | --dfa) ...``.

Exit codes: 0 success, 1 a validation check failed, 2 bad input,
3 numerical failure.
"""

import argparse
import json
import sys
import warnings
from fractions import Fraction

import numpy as np

from . import checks, numlinalg, pseudoinverse, spectral, symdyn
from .digraph import adjacency_matrix, count_walks, read_digraph_file
from .errors import InputError, NumericalError
from .regex import AutomatonSystem, compile_regex, read_system_file

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


# -- formatting -------------------------------------------------------------------


def fmt_number(x):
    """Fractions as "p/q" (or a bare integer), complex as {"re", "im"}, reals as floats."""
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return int(x)
    z = complex(x)
    if z.imag == 0:
        return z.real
    return {"re": z.real, "im": z.imag}


def fmt_matrix(M):
    return [[fmt_number(x) for x in row] for row in M]


def fmt_snapped(M):
    """Snap to rationals when every entry is one within tolerance."""
    exact = spectral.snap_rational(M)
    return fmt_matrix(exact if exact is not None else np.asarray(M))


def fmt_vector(v):
    return [fmt_number(x) for x in v]


def _complex_text(z):
    z = complex(z)
    if abs(z.imag) == 0:
        r = z.real
        text = str(int(r)) if r == int(r) else f"{r:.10g}"
        return f"({text})" if r < 0 else text
    return f"({z.real:.10g}{z.imag:+.10g}i)"


def polynomial_text(coeffs, tol=1e-12):
    terms = []
    for d, c in enumerate(coeffs):
        if abs(c) <= tol:
            continue
        c = complex(round(c.real, 12), round(c.imag, 12))
        mono = "" if d == 0 else ("m" if d == 1 else f"m^{d}")
        coef = _complex_text(c)
        terms.append(coef if not mono else f"{coef}*{mono}")
    return " + ".join(terms) if terms else "0"


# -- input ------------------------------------------------------------------------


def _parse_set(text, name):
    try:
        return frozenset(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InputError(f"--{name} expects comma-separated vertex ids, got {text!r}") from None


def load_system(args):
    """Build an AutomatonSystem from exactly one of --regex, --digraph, --dfa.

    A bare digraph counts walks between --from and --to (default: all vertices).
    """
    if args.regex is not None:
        system = compile_regex(args.regex)
        source = {"regex": args.regex}
    elif args.digraph is not None:
        D = read_digraph_file(args.digraph)
        everything = frozenset(D.vertices)
        system = AutomatonSystem(D, everything, everything)
        source = {"digraph": args.digraph}
    else:
        system = read_system_file(args.dfa)
        source = {"dfa": args.dfa}
    initial = _parse_set(args.from_, "from") if args.from_ is not None else system.initial
    final = _parse_set(args.to, "to") if args.to is not None else system.final
    if args.from_ is not None or args.to is not None:
        system = AutomatonSystem(system.digraph, initial, final)
    return system, source


def _tol(args):
    if args.tol <= 0:
        raise InputError("--tol must be positive")
    return args.tol


def _decompose(system, tol):
    A = adjacency_matrix(system.digraph)
    return A, spectral.decompose(A, tol)


def _emit(obj):
    print(json.dumps(obj, indent=2))


# -- analyses ---------------------------------------------------------------------


def spectrum_json(dec):
    return [
        {"eigenvalue": fmt_number(r.value), "multiplicity": r.multiplicity, "index": r.index}
        for r in dec.spectrum
    ]


def closed_form_json(scf):
    out = []
    for lam, coeffs in scf.terms:
        entry = {
            "eigenvalue": fmt_number(lam),
            "binomial_coefficients": [fmt_number(s) for s in coeffs],
        }
        if lam != 0:
            entry["polynomial"] = [fmt_number(c) for c in scf.polynomial(lam)]
        out.append(entry)
    return out


def dominant_json(A, dec):
    try:
        dom = spectral.dominant_term(A, dec)
    except InputError as exc:
        return None, str(exc)
    factors = []
    for lam, Eh in zip(dom.T, dom.E_hat):
        pairs = spectral.eigenvector_factorization(Eh, dec.matrix, lam)
        factors.append(
            {
                "eigenvalue": fmt_number(lam),
                "E_hat": fmt_snapped(Eh),
                "rank": len(pairs),
                "pairs": [{"right": fmt_vector(r), "left": fmt_vector(l)} for r, l in pairs],
            }
        )
    report = {
        "rho": dom.rho,
        "nu": dom.nu,
        "dominant_eigenvalues": [fmt_number(z) for z in dom.S],
        "limit": "A^n / (C(n, nu-1) rho^(n-nu+1)) - sum_T (lambda/rho)^(n-nu+1) E_hat -> 0",
        "terms": factors,
        "tol": spectral.DOMINANT_TOL,
    }
    return report, None


def growth_json(system):
    try:
        st = symdyn.dominant_structure(system.digraph)
    except InputError as exc:
        return {"applicable": False, "reason": str(exc)}
    if not st.incomparable:
        return {
            "applicable": False,
            "reason": "dominant components are comparable (a dominant eigenvalue has index > 1)",
            "rho": st.rho,
        }
    masks = symdyn.all_class_masks(system.digraph, st)
    coeffs = [symdyn.growth_coefficients(system, st, k, masks) for k in range(st.P)]
    return {
        "applicable": True,
        "rho": st.rho,
        "P": st.P,
        "coefficients": [{"k": k, "c": c} for k, c in enumerate(coeffs)],
        "limit": "f(P m + k) / rho^(P m + k) -> c_k",
        "tol": symdyn.POWER_TOL,
    }


def cmd_analyze(args):
    tol = _tol(args)
    system, source = load_system(args)
    A, dec = _decompose(system, tol)
    scf = spectral.structure_closed_form(system, tol, dec)
    dominant, why = dominant_json(A, dec)
    validation = checks.oracle_checks(system, args.depth, scf)
    report = {
        "input": source,
        "states": system.n,
        "initial": sorted(system.initial),
        "final": sorted(system.final),
        "rank_tol": tol,
        "spectrum": spectrum_json(dec),
        "closed_form": closed_form_json(scf),
        "dominant": dominant if dominant is not None else {"applicable": False, "reason": why},
        "growth": growth_json(system),
        "validation": [c.to_json() for c in validation],
    }
    if args.json:
        _emit(report)
    else:
        print(f"states: {system.n}  initial: {sorted(system.initial)}  final: {sorted(system.final)}")
        print("spectrum (eigenvalue, multiplicity, index):")
        for r in dec.spectrum:
            print(f"  {_complex_text(r.value)}  m={r.multiplicity}  nu={r.index}")
        print("structure function:")
        parts = []
        for lam, coeffs in scf.terms:
            if lam == 0:
                continue
            parts.append(f"[{polynomial_text(scf.polynomial(lam))}] * {_complex_text(lam)}^m")
        print("  f(m) = " + (" + ".join(parts) if parts else "0") + "   (exact for m >= nu(0))")
        if dominant is None:
            print(f"dominant term: {why}")
        else:
            print(f"dominant term: rho={dominant['rho']:g}  nu={dominant['nu']}")
        growth = report["growth"]
        if growth["applicable"]:
            cs = ", ".join(f"c_{g['k']}={g['c']:.10g}" for g in growth["coefficients"])
            print(f"growth: P={growth['P']}  {cs}")
        for c in validation:
            print(c.line())
    return EXIT_OK if all(c.passed for c in validation) else EXIT_CHECK_FAILED


def cmd_count(args):
    system, _ = load_system(args)
    if args.length is None:
        raise InputError("count needs --length")
    value = count_walks(system.digraph, system.initial, system.final, args.length)
    if args.json:
        _emit({"length": args.length, "count": value})
    else:
        print(value)
    return EXIT_OK


def cmd_projectors(args):
    system, _ = load_system(args)
    A, dec = _decompose(system, _tol(args))
    out = []
    for k, (rec, E) in enumerate(dec):
        M = dec.exact_projectors[k] if dec.exact_projectors else E
        out.append(
            {
                "eigenvalue": fmt_number(rec.value),
                "multiplicity": rec.multiplicity,
                "index": rec.index,
                "exact": dec.exact_projectors is not None,
                "projector": fmt_matrix(M),
            }
        )
    _emit({"matrix": fmt_matrix(A), "projectors": out})
    return EXIT_OK


def cmd_drazin(args):
    system, _ = load_system(args)
    A, dec = _decompose(system, _tol(args))
    _emit({"matrix": fmt_matrix(A), "drazin": fmt_snapped(pseudoinverse.drazin(A, dec))})
    return EXIT_OK


def cmd_adjugate(args):
    system, _ = load_system(args)
    A, dec = _decompose(system, _tol(args))
    _emit(
        {
            "matrix": fmt_matrix(A),
            "adjugate": fmt_matrix(pseudoinverse.adjugate(A)),
            "spectral": fmt_snapped(pseudoinverse.adjugate_spectral(A, dec)),
        }
    )
    return EXIT_OK


def cmd_classes(args):
    system, _ = load_system(args)
    D = system.digraph
    st = symdyn.dominant_structure(D)
    out = {
        "rho": st.rho,
        "P": st.P,
        "incomparable": st.incomparable,
        "components": [],
    }
    for i, comp in enumerate(st.components):
        entry = {
            "component": sorted(comp),
            "period": st.periods[i],
            "classes": [sorted(c) for c in st.classes[i]],
        }
        if st.incomparable:
            entry["masks"] = [
                {
                    "j": pair.j + 1,
                    "V": sorted(pair.V),
                    "mask": fmt_matrix(pair.A_mask.astype(int)),
                    "v_L": fmt_snapped([pair.v_L])[0],
                    "v_R": fmt_snapped([pair.v_R])[0],
                }
                for pair in symdyn.class_masks(D, st, i)
            ]
        out["components"].append(entry)
    if not st.incomparable:
        out["note"] = "index > 1; use spectral module instead"
    _emit(out)
    return EXIT_OK


def run_validation(system, depth, tol):
    """Every invariant suite that applies to this system."""
    A, dec = _decompose(system, tol)
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        results += checks.projector_checks(A, dec)
    results += checks.closed_form_checks(A, dec, depth)
    results += checks.oracle_checks(system, depth)
    results += checks.drazin_checks(A, dec)
    results += checks.adjugate_checks(A, dec)
    results += checks.support_checks(system.digraph, dec)
    if any(r.value != 0 for r in dec.spectrum):
        st = symdyn.dominant_structure(system.digraph)
        if st.incomparable:
            masks = symdyn.all_class_masks(system.digraph, st)
            results += checks.mask_checks(system.digraph, st, masks)
            if system.initial and system.final:
                m = checks.convergence_depth(dec, st)
                results += checks.growth_checks(system, st, masks, m=m)
    return results


def cmd_validate(args):
    system, source = load_system(args)
    results = run_validation(system, args.depth, _tol(args))
    failed = [c for c in results if not c.passed]
    if args.json:
        _emit({"input": source, "checks": [c.to_json() for c in results], "failed": len(failed)})
    else:
        for c in results:
            print(c.line())
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


COMMANDS = {
    "analyze": (cmd_analyze, "closed form, dominant term and growth coefficients"),
    "count": (cmd_count, "exact walk count of a given length"),
    "projectors": (cmd_projectors, "spectral projectors as JSON"),
    "drazin": (cmd_drazin, "Drazin inverse as JSON"),
    "adjugate": (cmd_adjugate, "adjugate (exact and spectral) as JSON"),
    "classes": (cmd_classes, "dominant periodic classes, masks and eigenpairs as JSON"),
    "validate": (cmd_validate, "run every invariant check on the input"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="walkcount", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--regex", help="regular expression over letters with |, * and ()")
        src.add_argument("--digraph", metavar="FILE", help="digraph text file ('digraph n' then 'u v [mult]' lines)")
        src.add_argument("--dfa", metavar="FILE", help="DFA JSON file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--length", type=int, help="walk length m for count")
        p.add_argument("--from", dest="from_", metavar="S", help="initial vertices, e.g. 1,3")
        p.add_argument("--to", metavar="T", help="final vertices, e.g. 2,5")
        p.add_argument("--tol", type=float, default=numlinalg.DEFAULT_TOL, help="relative rank tolerance (default 1e-9)")
        p.add_argument("--depth", type=int, default=12, help="largest m checked against the oracle (default 12)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        for key, value in exc.diagnostics.items():
            print(f"  {key}: {value}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
