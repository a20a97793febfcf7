"""Periodic-class masks and nonnegative dominant eigenpairs of reducible digraphs."""

from collections import deque
from dataclasses import dataclass
from math import lcm

import numpy as np

from . import numlinalg
from .digraph import (
    adjacency_matrix,
    has_internal_arc,
    induced,
    irreducible_components,
    mask,
    period,
    power,
    reach_sets,
)
from .errors import InputError, NumericalError
from .spectral import DOMINANT_TOL

POWER_TOL = 1e-12
MAX_SQUARINGS = 64


def _component_eigenvalues(D, comp):
    sub = induced(D, comp)
    return [lam for lam, _ in numlinalg.eigenvalues(numlinalg.char_poly(sub.matrix))]


def spectral_radius(D):
    vals = numlinalg.eigenvalues(numlinalg.char_poly(D.matrix))
    return max((abs(v) for v, _ in vals), default=0.0)


@dataclass(frozen=True)
class DominantStructure:
    rho: float
    components: tuple  # dominant components, Frobenius normal form order
    component_indices: tuple  # 1-based positions in the full partition
    periods: tuple
    classes: tuple  # per component: tuple of frozensets P_{i,0..p_i-1}
    P: int
    incomparable: bool

    @property
    def s(self):
        return len(self.components)

    def position(self, component):
        return self.components.index(frozenset(component))


def dominant_structure(D, tol=DOMINANT_TOL):
    """Components of maximal spectral radius, their periods and classes."""
    rho = spectral_radius(D)
    if rho == 0:
        raise InputError("nilpotent: all walks die out")
    partition = irreducible_components(D)
    comps, idx, periods, classes = [], [], [], []
    for k, comp in enumerate(partition.components, 1):
        if not has_internal_arc(D, comp):
            continue
        r = max(abs(v) for v in _component_eigenvalues(D, comp))
        if r >= rho * (1 - tol):
            ps = period(D, comp)
            comps.append(comp)
            idx.append(k)
            periods.append(ps.period)
            classes.append(ps.classes)
    P = 1
    for p in periods:
        P = lcm(P, p)
    incomparable = True
    for a in comps:
        _, reached = reach_sets(D, a)
        if any(reached & b for b in comps if b is not a):
            incomparable = False
            break
    return DominantStructure(
        float(rho), tuple(comps), tuple(idx), tuple(periods), tuple(classes), P, incomparable
    )


def _limit_projector(B):
    """``lim B^(2^k)`` by repeated squaring; B's dominant eigenvalue must be 1 and simple."""
    for _ in range(MAX_SQUARINGS):
        B2 = B @ B
        if np.max(np.abs(B2 - B)) <= POWER_TOL * max(np.max(np.abs(B)), 1.0):
            return B2
        B = B2
    raise NumericalError("power iteration did not converge", {"squarings": MAX_SQUARINGS})


def perron_pair(A, normalization=1.0):
    """Nonnegative left/right Perron vectors of an irreducible nonnegative matrix.

    Scaled so that ``v_L @ v_R == normalization`` with equal Euclidean norms.
    ``I + A`` is primitive, so power iteration converges even when A is periodic.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    rho = max(abs(v) for v in np.linalg.eigvals(A))
    B = (np.eye(n) + A) / (1 + rho)
    E = _limit_projector(B)
    ones = np.ones(n)
    v_r = E @ ones
    v_l = ones @ E
    v_r /= np.linalg.norm(v_r)
    v_l /= np.linalg.norm(v_l)
    s = np.sqrt(normalization / (v_l @ v_r))
    return v_l * s, v_r * s


@dataclass(frozen=True)
class MaskedEigenpair:
    i: int  # position in DominantStructure.components
    j: int  # class index, 0-based
    V: frozenset
    A_mask: np.ndarray
    v_L: np.ndarray
    v_R: np.ndarray
    period: int

    @property
    def product(self):
        return float(self.v_L @ self.v_R)


def class_masks(D, structure, i):
    """Masked dominant eigenpairs for every periodic class of dominant component i.

    ``i`` is a 0-based position in ``structure.components`` or the component
    vertex set itself. Eigenvectors come from power iteration (by repeated
    squaring) on the ``V_{i,j}``-mask of ``A^p`` from an all-ones start on
    ``V_{i,j}``, then are scaled to agree on the component with its Perron
    vectors normalized to ``v_L v_R = p``.
    """
    if not structure.incomparable:
        raise InputError("index > 1; use spectral module instead")
    if not isinstance(i, int):
        i = structure.position(i)
    comp = structure.components[i]
    p = structure.periods[i]
    classes = structure.classes[i]
    rho = structure.rho
    verts = sorted(comp)
    A_i = np.array(induced(D, comp).matrix, dtype=float)
    perron_l, perron_r = perron_pair(A_i, p)
    pos = {v: k for k, v in enumerate(verts)}
    Dp = power(D, p)
    Ap = np.array(adjacency_matrix(Dp), dtype=float)
    target = rho**p
    out = []
    for j, cls in enumerate(classes):
        reaching, reached = reach_sets(Dp, cls)
        V = reaching | reached
        M = mask(Ap, V)
        E = _limit_projector(M / target)
        start = np.zeros(D.n)
        for v in V:
            start[v - 1] = 1.0
        v_r = E @ start
        v_l = start @ E
        idx = [v - 1 for v in sorted(cls)]
        ref_r = np.array([perron_r[pos[v]] for v in sorted(cls)])
        ref_l = np.array([perron_l[pos[v]] for v in sorted(cls)])
        v_r = v_r * (ref_r @ v_r[idx]) / (v_r[idx] @ v_r[idx])
        v_l = v_l * (ref_l @ v_l[idx]) / (v_l[idx] @ v_l[idx])
        out.append(MaskedEigenpair(i, j, frozenset(V), M, v_l, v_r, p))
    return out


def all_class_masks(D, structure):
    return [class_masks(D, structure, i) for i in range(structure.s)]


def growth_coefficients(sys, structure, k, masks=None):
    """Limit of ``f(Pm + k) / rho^(Pm + k)``.

    Sum over dominant components i and classes j of
    ``(w_L v_R^{i,j}) (v_L^{i,j+k} w_R)`` with ``w_L = v_I``, ``w_R = v_F``.
    """
    if not structure.incomparable:
        raise InputError("dominant components are comparable; the coefficient formula does not apply")
    if not 0 <= k < structure.P:
        raise InputError(f"residue {k} outside 0..{structure.P - 1}")
    if masks is None:
        masks = all_class_masks(sys.digraph, structure)
    w_l = sys.v_initial.astype(float)
    w_r = sys.v_final.astype(float)
    total = 0.0
    for pairs in masks:
        p = len(pairs)
        for j, pair in enumerate(pairs):
            total += (w_l @ pair.v_R) * (pairs[(j + k) % p].v_L @ w_r)
    return float(total)


# -- structural checks ---------------------------------------------------------


@dataclass(frozen=True)
class CoordinateWitness:
    vertex: int
    passed: bool
    path: tuple  # vertices from the coordinate to (right) or from (left) the witness


@dataclass(frozen=True)
class SupportReport:
    side: str
    eigenvalue: complex
    witnesses: tuple

    @property
    def passed(self):
        return all(w.passed for w in self.witnesses)


def _bfs_path(step, start, goal):
    parent = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u in goal:
            path = [u]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return tuple(reversed(path))
        for w in step(u):
            if w not in parent:
                parent[w] = u
                queue.append(w)
    return None


def support_reachability_check(D, v, lam, side="right", tol=1e-9, eig_tol=1e-8):
    """Witness paths linking each support coordinate to a lambda-component.

    Right vectors: every nonzero coordinate u has a walk from u to some w in
    a component with eigenvalue ``lam`` where ``v(w) != 0``. Left vectors:
    the walk runs from such a w to u.
    """
    v = np.asarray(v, dtype=complex).ravel()
    scale = np.max(np.abs(v)) if v.size else 0.0
    if scale == 0:
        return SupportReport(side, lam, ())
    support = {k + 1 for k in range(D.n) if abs(v[k]) > tol * scale}
    partition = irreducible_components(D)
    has_lam = []
    for comp in partition.components:
        vals = _component_eigenvalues(D, comp)
        has_lam.append(any(abs(x - lam) <= eig_tol * max(1.0, abs(lam)) for x in vals))
    goal = {w for w in support if has_lam[partition.index_of(w)]}
    witnesses = []
    for u in sorted(support):
        if side == "right":
            path = _bfs_path(D.successors, u, goal)
        elif side == "left":
            path = _bfs_path(D.predecessors, u, goal)
            path = tuple(reversed(path)) if path else None
        else:
            raise ValueError("side must be 'left' or 'right'")
        witnesses.append(CoordinateWitness(u, path is not None, path or ()))
    return SupportReport(side, lam, tuple(witnesses))


@dataclass(frozen=True)
class RestrictionReport:
    component: frozenset
    component_index: int  # 1-based in Frobenius order
    restriction: np.ndarray
    residual: float
    passed: bool


def component_restriction_check(D, v, lam, nu, side="right", tol=1e-8):
    """Restrict a generalized eigenvector to its extreme supporting component.

    For right vectors the last component (Frobenius order) with nonzero
    restriction is used, for left vectors the first; the restriction must be
    a generalized ``lam``-eigenvector of that block with index at most ``nu``.
    """
    v = np.asarray(v, dtype=complex).ravel()
    scale = max(np.max(np.abs(v)), 1e-300)
    partition = irreducible_components(D)
    order = list(enumerate(partition.components, 1))
    if side == "left":
        order.reverse()
    elif side != "right":
        raise ValueError("side must be 'left' or 'right'")
    chosen = None
    for k, comp in reversed(order):
        part = np.array([v[u - 1] for u in sorted(comp)])
        if np.max(np.abs(part)) > tol * scale:
            chosen = (k, comp, part)
            break
    if chosen is None:
        return RestrictionReport(frozenset(), 0, np.zeros(0), 0.0, True)
    k, comp, part = chosen
    M = np.array(induced(D, comp).matrix, dtype=complex)
    B = M - lam * np.eye(M.shape[0])
    P = np.linalg.matrix_power(B, nu)
    res = P.T @ part if side == "left" else P @ part
    residual = float(np.linalg.norm(res))
    bound = tol * max(np.linalg.norm(B, 2), 1.0) ** nu * np.linalg.norm(part)
    return RestrictionReport(frozenset(comp), k, part, residual, residual <= bound)
