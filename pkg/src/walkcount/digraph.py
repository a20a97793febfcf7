"""Multigraph digraphs over vertices 1..n with exact integer adjacency.

Vertices are 1-indexed everywhere in the public API. Internally the
adjacency is a dense tuple-of-tuples of Python ints, so entries (and walk
counts) never overflow.
"""

from collections import deque
from dataclasses import dataclass, field
from heapq import heappop, heappush
from math import gcd

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Digraph:
    n: int
    matrix: tuple  # tuple of n rows, each a tuple of n nonnegative ints

    def __post_init__(self):
        if self.n <= 0:
            raise InputError(f"vertex count must be positive, got {self.n}")
        if len(self.matrix) != self.n or any(len(row) != self.n for row in self.matrix):
            raise InputError("adjacency matrix shape does not match vertex count")
        for row in self.matrix:
            for x in row:
                if x < 0:
                    raise InputError("arc multiplicities must be nonnegative")

    @property
    def vertices(self):
        return range(1, self.n + 1)

    def arcs(self):
        """Yield (u, v, multiplicity) for every present arc, 1-indexed, row-major."""
        for i, row in enumerate(self.matrix):
            for j, mult in enumerate(row):
                if mult:
                    yield i + 1, j + 1, mult

    def successors(self, u):
        row = self.matrix[u - 1]
        return [j + 1 for j in range(self.n) if row[j]]

    def predecessors(self, v):
        return [i + 1 for i in range(self.n) if self.matrix[i][v - 1]]

    def __str__(self):
        return write_digraph(self)


def build_digraph(edges, n):
    """Build a digraph from ``(u, v)`` or ``(u, v, mult)`` tuples.

    Repeated pairs have their multiplicities summed.
    """
    if not isinstance(n, int) or n <= 0:
        raise InputError(f"vertex count must be a positive integer, got {n!r}")
    rows = [[0] * n for _ in range(n)]
    for edge in edges:
        if len(edge) == 2:
            u, v = edge
            mult = 1
        elif len(edge) == 3:
            u, v, mult = edge
        else:
            raise InputError(f"arc must be (u, v) or (u, v, mult), got {edge!r}")
        if not (1 <= u <= n and 1 <= v <= n):
            raise InputError(f"arc ({u}, {v}) has an endpoint outside 1..{n}")
        if mult < 1:
            raise InputError(f"arc ({u}, {v}) has multiplicity {mult} < 1")
        rows[u - 1][v - 1] += int(mult)
    return Digraph(n, tuple(tuple(r) for r in rows))


def from_matrix(M):
    """Digraph whose adjacency is the given square nonnegative integer matrix."""
    rows = [[int(x) for x in row] for row in M]
    n = len(rows)
    for row in rows:
        if len(row) != n:
            raise InputError("adjacency matrix must be square")
        for x in row:
            if x < 0:
                raise InputError("adjacency entries must be nonnegative")
    return Digraph(n, tuple(tuple(r) for r in rows))


def adjacency_matrix(D):
    """Exact adjacency as a numpy array of Python ints (dtype=object)."""
    A = np.empty((D.n, D.n), dtype=object)
    for i, row in enumerate(D.matrix):
        for j, x in enumerate(row):
            A[i, j] = x
    return A


def _check_vertex_set(D, S, name="vertex set"):
    S = frozenset(S)
    for v in S:
        if not (isinstance(v, (int, np.integer)) and 1 <= v <= D.n):
            raise InputError(f"{name} contains {v!r}, outside 1..{D.n}")
    return S


def count_walks(D, S, T, m):
    """Number of (S, T)-walks of length m.

    Plain dynamic programming over arc multiplicities in Python ints; it
    never touches eigenvalues, so it serves as the oracle for every closed
    form in the package.
    """
    S = _check_vertex_set(D, S, "source set")
    T = _check_vertex_set(D, T, "target set")
    if m < 0:
        raise InputError("walk length must be nonnegative")
    out = [[(j, x) for j, x in enumerate(row) if x] for row in D.matrix]
    counts = [1 if (i + 1) in S else 0 for i in range(D.n)]
    for _ in range(m):
        nxt = [0] * D.n
        for i, c in enumerate(counts):
            if c:
                for j, x in out[i]:
                    nxt[j] += c * x
        counts = nxt
    return sum(counts[t - 1] for t in T)


@dataclass(frozen=True)
class ComponentPartition:
    components: tuple  # tuple of frozensets, Frobenius normal form order
    vertex_to_component: dict = field(compare=False)

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def index_of(self, v):
        """0-based position of the component holding vertex ``v``."""
        return self.vertex_to_component[v]


def _tarjan(D):
    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = 0
    succ = {u: D.successors(u) for u in D.vertices}
    for root in D.vertices:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            children = succ[v]
            while pos < len(children):
                w = children[pos]
                pos += 1
                if w not in index:
                    work.append((v, pos))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                sccs.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sccs


def irreducible_components(D):
    """Strongly connected components in topological order of the condensation.

    Among components with no forced order the one containing the smallest
    vertex id comes first.
    """
    sccs = _tarjan(D)
    comp_of = {}
    for k, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = k
    out_edges = [set() for _ in sccs]
    indeg = [0] * len(sccs)
    for u, v, _ in D.arcs():
        a, b = comp_of[u], comp_of[v]
        if a != b and b not in out_edges[a]:
            out_edges[a].add(b)
            indeg[b] += 1
    heap = [(min(c), k) for k, c in enumerate(sccs) if indeg[k] == 0]
    heap.sort()
    order = []
    while heap:
        _, k = heappop(heap)
        order.append(k)
        for b in out_edges[k]:
            indeg[b] -= 1
            if indeg[b] == 0:
                heappush(heap, (min(sccs[b]), b))
    components = tuple(sccs[k] for k in order)
    v2c = {v: i for i, comp in enumerate(components) for v in comp}
    return ComponentPartition(components, v2c)


@dataclass(frozen=True)
class PeriodStructure:
    period: int
    classes: tuple  # tuple of frozensets P_0..P_{p-1}


def has_internal_arc(D, component):
    component = frozenset(component)
    return any(D.matrix[u - 1][v - 1] for u in component for v in component)


def period(D, component):
    """Period and periodic classes of an irreducible component.

    BFS levels from the smallest vertex; the period is the gcd of
    ``level[u] + 1 - level[v]`` over internal arcs. Class ``k`` holds the
    vertices whose level is ``k mod p``, so ``P_0`` contains the smallest id.
    """
    component = _check_vertex_set(D, component, "component")
    if not component or not has_internal_arc(D, component):
        raise InputError("aperiodicity undefined: component has no closed walk")
    start = min(component)
    level = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in D.successors(u):
            if v in component and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    if set(level) != component:
        raise InputError("vertex set is not strongly connected")
    g = 0
    for u in component:
        for v in D.successors(u):
            if v in component:
                g = gcd(g, abs(level[u] + 1 - level[v]))
    classes = [set() for _ in range(g)]
    for v, lv in level.items():
        classes[lv % g].add(v)
    return PeriodStructure(g, tuple(frozenset(c) for c in classes))


def _matmul(X, Y):
    cols = list(zip(*Y))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in X)


def int_matrix_power(M, r):
    """Exact power of a square matrix of Python ints (tuple of tuples)."""
    M = tuple(tuple(int(x) for x in row) for row in M)
    n = len(M)
    result = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    base = M
    while r:
        if r & 1:
            result = _matmul(result, base)
        r >>= 1
        if r:
            base = _matmul(base, base)
    return result


def power(D, r):
    """The r-th power digraph: one arc per length-r walk of ``D``."""
    if r < 1:
        raise InputError("power must be at least 1")
    return Digraph(D.n, int_matrix_power(D.matrix, r))


def reach_sets(D, S):
    """Return ``(reaching, reached)`` for vertex set ``S``.

    Length-0 walks count, so ``S`` is contained in both.
    """
    S = _check_vertex_set(D, S)

    def closure(step):
        seen = set(S)
        queue = deque(S)
        while queue:
            u = queue.popleft()
            for w in step(u):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return frozenset(seen)

    return closure(D.predecessors), closure(D.successors)


def mask(M, S):
    """Zero every row and column of ``M`` whose (1-indexed) vertex is not in S."""
    M = np.array(M, copy=True)
    keep = np.zeros(M.shape[0], dtype=bool)
    for v in S:
        keep[v - 1] = True
    M[~keep, :] = 0
    M[:, ~keep] = 0
    return M


def induced(D, vertices):
    """Subdigraph induced on ``vertices`` (sorted), renumbered 1..k."""
    vs = sorted(vertices)
    return Digraph(len(vs), tuple(tuple(D.matrix[u - 1][v - 1] for v in vs) for u in vs))


def parse_digraph(text):
    """Read the ``digraph <n>`` text format."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if parts[0] != "digraph" or len(parts) != 2:
                raise InputError(f"line {lineno}: expected 'digraph <n>'")
            try:
                n = int(parts[1])
            except ValueError:
                raise InputError(f"line {lineno}: vertex count is not an integer") from None
            continue
        if len(parts) not in (2, 3):
            raise InputError(f"line {lineno}: expected 'u v [mult]'")
        try:
            edges.append(tuple(int(p) for p in parts))
        except ValueError:
            raise InputError(f"line {lineno}: non-integer arc field") from None
    if n is None:
        raise InputError("missing 'digraph <n>' header")
    return build_digraph(edges, n)


def write_digraph(D):
    lines = [f"digraph {D.n}"]
    for u, v, mult in D.arcs():
        lines.append(f"{u} {v}" if mult == 1 else f"{u} {v} {mult}")
    return "\n".join(lines) + "\n"


def read_digraph_file(path):
    with open(path) as fh:
        return parse_digraph(fh.read())
