"""Regular expressions to counting systems ``(v_I, A, v_F)``.

Grammar (no other features are accepted)::

    alt    := concat ('|' concat)*
    concat := star star*
    star   := atom '*'*
    atom   := LETTER | '(' alt ')'

The compiled automaton is the unminimized subset-construction DFA of a
Thompson NFA; only the structure function is contractual, not state count.
"""

import json
from dataclasses import dataclass

import numpy as np

from .digraph import Digraph, build_digraph, count_walks, reach_sets
from .errors import InputError, RegexSyntaxError


@dataclass(frozen=True)
class Literal:
    symbol: str


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Alt:
    options: tuple


@dataclass(frozen=True)
class Star:
    child: object


def alphabet(ast):
    if isinstance(ast, Literal):
        return {ast.symbol}
    if isinstance(ast, Star):
        return alphabet(ast.child)
    children = ast.parts if isinstance(ast, Concat) else ast.options
    out = set()
    for c in children:
        out |= alphabet(c)
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self):
        if not self.text:
            raise RegexSyntaxError("empty expression", 0)
        node = self.alt()
        if self.pos != len(self.text):
            ch = self.text[self.pos]
            if ch == ")":
                raise RegexSyntaxError("unbalanced ')'", self.pos)
            raise RegexSyntaxError(f"unexpected {ch!r}", self.pos)
        return node

    def alt(self):
        options = [self.concat()]
        while self.peek() == "|":
            self.pos += 1
            options.append(self.concat())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def concat(self):
        parts = []
        while True:
            ch = self.peek()
            if ch is None or ch in "|)":
                break
            parts.append(self.star())
        if not parts:
            raise RegexSyntaxError("empty operand", self.pos)
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def star(self):
        node = self.atom()
        while self.peek() == "*":
            self.pos += 1
            node = Star(node)
        return node

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            node = self.alt()
            if self.peek() != ")":
                raise RegexSyntaxError("missing ')'", self.pos)
            self.pos += 1
            return node
        if ch is not None and ch.isascii() and ch.isalpha():
            self.pos += 1
            return Literal(ch)
        if ch == "*":
            raise RegexSyntaxError("'*' has nothing to repeat", start)
        raise RegexSyntaxError(f"unsupported character {ch!r}", start)


def parse_regex(expr):
    """Parse ``expr`` into an AST of Literal/Concat/Alt/Star nodes."""
    return _Parser(expr).parse()


class _NFA:
    """Thompson NFA: eps[s] is a list of targets, trans[s] a list of (symbol, target)."""

    def __init__(self):
        self.eps = []
        self.trans = []

    def new_state(self):
        self.eps.append([])
        self.trans.append([])
        return len(self.eps) - 1

    def build(self, node):
        if isinstance(node, Literal):
            s, t = self.new_state(), self.new_state()
            self.trans[s].append((node.symbol, t))
            return s, t
        if isinstance(node, Concat):
            start, end = self.build(node.parts[0])
            for part in node.parts[1:]:
                s, t = self.build(part)
                self.eps[end].append(s)
                end = t
            return start, end
        if isinstance(node, Alt):
            s, t = self.new_state(), self.new_state()
            for option in node.options:
                a, b = self.build(option)
                self.eps[s].append(a)
                self.eps[b].append(t)
            return s, t
        if isinstance(node, Star):
            s, t = self.new_state(), self.new_state()
            a, b = self.build(node.child)
            self.eps[s].extend([a, t])
            self.eps[b].extend([a, t])
            return s, t
        raise TypeError(f"not a regex node: {node!r}")

    def closure(self, states):
        seen = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for t in self.eps[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)


@dataclass(frozen=True)
class AutomatonSystem:
    digraph: Digraph
    initial: frozenset
    final: frozenset

    def __post_init__(self):
        for name, S in (("initial", self.initial), ("final", self.final)):
            for v in S:
                if not 1 <= v <= self.digraph.n:
                    raise InputError(f"{name} state {v} outside 1..{self.digraph.n}")

    @property
    def n(self):
        return self.digraph.n

    @property
    def v_initial(self):
        return np.array([1 if i in self.initial else 0 for i in range(1, self.n + 1)])

    @property
    def v_final(self):
        return np.array([1 if i in self.final else 0 for i in range(1, self.n + 1)])


def zero_system():
    return AutomatonSystem(build_digraph([], 1), frozenset(), frozenset())


def compile_regex(ast):
    """Subset-construction DFA of the Thompson NFA for ``ast``.

    States are numbered in BFS discovery order from the initial subset, with
    symbols visited in sorted order; the empty subset is not a state.
    """
    if isinstance(ast, str):
        ast = parse_regex(ast)
    nfa = _NFA()
    start, accept = nfa.build(ast)
    symbols = sorted(alphabet(ast))
    first = nfa.closure([start])
    ids = {first: 1}
    order = [first]
    arcs = []
    k = 0
    while k < len(order):
        subset = order[k]
        k += 1
        for a in symbols:
            moved = {t for s in subset for sym, t in nfa.trans[s] if sym == a}
            if not moved:
                continue
            target = nfa.closure(moved)
            if target not in ids:
                ids[target] = len(order) + 1
                order.append(target)
            arcs.append((ids[subset], ids[target]))
    D = build_digraph(arcs, len(order))
    final = frozenset(ids[s] for s in order if accept in s)
    return AutomatonSystem(D, frozenset({1}), final)


compile = compile_regex


def trim(sys):
    """Keep only states reached from I that also reach F; f(m) is unchanged."""
    if not sys.initial or not sys.final:
        return zero_system()
    _, reached = reach_sets(sys.digraph, sys.initial)
    reaching, _ = reach_sets(sys.digraph, sys.final)
    keep = sorted(reached & reaching)
    if not keep:
        return zero_system()
    new_id = {v: i + 1 for i, v in enumerate(keep)}
    arcs = [
        (new_id[u], new_id[v], m)
        for u, v, m in sys.digraph.arcs()
        if u in new_id and v in new_id
    ]
    return AutomatonSystem(
        build_digraph(arcs, len(keep)),
        frozenset(new_id[v] for v in sys.initial if v in new_id),
        frozenset(new_id[v] for v in sys.final if v in new_id),
    )


def structure_function(sys, m):
    """Exact ``v_I^T A^m v_F``."""
    return count_walks(sys.digraph, sys.initial, sys.final, m)


def system_to_json(sys):
    return {
        "n": sys.n,
        "initial": sorted(sys.initial),
        "final": sorted(sys.final),
        "arcs": [[u, v, m] for u, v, m in sys.digraph.arcs()],
    }


def system_from_json(data):
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid DFA JSON: {exc}") from None
    try:
        n = data["n"]
        arcs = [tuple(a) for a in data["arcs"]]
        initial = frozenset(data["initial"])
        final = frozenset(data["final"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"invalid DFA JSON: missing or malformed field {exc}") from None
    if not isinstance(n, int):
        raise InputError("DFA JSON field 'n' must be an integer")
    return AutomatonSystem(build_digraph(arcs, n), initial, final)


def read_system_file(path):
    with open(path) as fh:
        return system_from_json(fh.read())
