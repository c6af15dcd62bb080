"""Domain model for finite labelled Markov processes.

Everything numeric is a :class:`fractions.Fraction`. Floats only show up in
human-readable output, never in comparisons.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class ModelError(ValueError):
    """Base class for problems with user supplied models."""


class ParseError(ModelError):
    """Input is not well formed (bad JSON, bad shape, bad number)."""


class ValidationError(ModelError):
    """Input is well formed but violates a model invariant."""


def to_fraction(value) -> Fraction:
    """Parse ``"3/10"``, ``"0.3"``, ints, or floats into an exact rational.

    Floats are read through their shortest decimal repr, so ``0.1`` becomes
    ``1/10`` and not the binary approximation.
    """
    if isinstance(value, bool):
        raise ParseError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"not an exact rational: {value!r}") from None
    raise ParseError(f"not a number: {value!r}")


def format_fraction(q: Fraction) -> str:
    return str(q)


class SubDistribution:
    """Finitely supported subprobability distribution.

    Keys may be any hashable (state indices for LMP transitions, nested
    :class:`SubDistribution` objects for :func:`flatten`). Absent keys have
    weight zero and zero weights are never stored.
    """

    __slots__ = ("_weights", "_hash")

    def __init__(self, weights: Mapping[Hashable, object] | Iterable = (), *, check_mass: bool = True):
        items = weights.items() if isinstance(weights, (Mapping, SubDistribution)) else weights
        stored: dict = {}
        for key, value in items:
            q = to_fraction(value)
            if q < 0:
                raise ValidationError(f"negative weight {q} at {key!r}")
            if q:
                stored[key] = stored.get(key, ZERO) + q
        if check_mass:
            total = sum(stored.values(), ZERO)
            if total > 1:
                raise ValidationError(f"mass {total} exceeds 1 by {total - 1}")
        self._weights = stored
        self._hash = None

    @classmethod
    def zero(cls) -> "SubDistribution":
        return cls()

    def __getitem__(self, key) -> Fraction:
        return self._weights.get(key, ZERO)

    def __iter__(self) -> Iterator:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def __contains__(self, key) -> bool:
        return key in self._weights

    def items(self):
        return self._weights.items()

    @property
    def support(self) -> frozenset:
        return frozenset(self._weights)

    @property
    def mass(self) -> Fraction:
        return sum(self._weights.values(), ZERO)

    def measure(self, xs: Iterable) -> Fraction:
        """Mass of the set ``xs``."""
        return sum((self._weights.get(x, ZERO) for x in set(xs)), ZERO)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubDistribution):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._weights.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {v}" for k, v in sorted(self._weights.items(), key=lambda kv: repr(kv[0])))
        return f"SubDistribution({{{body}}})"


def dirac(x: int, n: int | None = None) -> SubDistribution:
    if n is not None and not 0 <= x < n:
        raise ValueError(f"state {x} outside 0..{n - 1}")
    return SubDistribution({x: ONE})


def pushforward(f: Mapping | Callable, mu: SubDistribution) -> SubDistribution:
    """Image measure: ``result(y) = mu(f^{-1}{y})``."""
    fn = f.__getitem__ if isinstance(f, Mapping) else f
    out: dict = {}
    for x, w in mu.items():
        y = fn(x)
        out[y] = out.get(y, ZERO) + w
    return SubDistribution(out)


def flatten(outer: Mapping[SubDistribution, object]) -> SubDistribution:
    """Monad multiplication: ``result(x) = sum_phi outer(phi) * phi(x)``."""
    outer = SubDistribution(outer)
    out: dict = {}
    for phi, w in outer.items():
        for x, p in phi.items():
            out[x] = out.get(x, ZERO) + w * p
    return SubDistribution(out)


def sub_order(phi: SubDistribution, psi: SubDistribution) -> bool:
    """Pointwise order ``phi <= psi``."""
    return all(w <= psi[x] for x, w in phi.items())


def eps_order(phi: SubDistribution, psi: SubDistribution, eps) -> bool:
    """``phi(B) <= psi(B) + eps`` for every set ``B``.

    The worst ``B`` is ``{x : phi(x) > psi(x)}``, so only the positive-part
    sum needs checking.
    """
    eps = to_fraction(eps)
    excess = sum((max(w - psi[x], ZERO) for x, w in phi.items()), ZERO)
    return excess <= eps


@dataclass(frozen=True)
class LMP:
    """Finite labelled Markov process with integer-indexed states and actions."""

    states: tuple[str, ...]
    actions: tuple[str, ...]
    transitions: Mapping[tuple[int, int], SubDistribution] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.states)) != len(self.states):
            raise ValidationError("duplicate state names")
        if len(set(self.actions)) != len(self.actions):
            raise ValidationError("duplicate action names")
        n, k = len(self.states), len(self.actions)
        clean = {}
        for (s, a), mu in self.transitions.items():
            if not (0 <= s < n and 0 <= a < k):
                raise ValidationError(f"transition ({s}, {a}) references an undeclared state or action")
            bad = [t for t in mu if not (isinstance(t, int) and 0 <= t < n)]
            if bad:
                raise ValidationError(f"transition ({s}, {a}) targets undeclared states {bad}")
            if len(mu):
                clean[(s, a)] = mu
        object.__setattr__(self, "transitions", clean)

    @classmethod
    def build(cls, states: Sequence[str], actions: Sequence[str],
              transitions: Mapping[tuple[str, str], Mapping[str, object]]) -> "LMP":
        """Build from names, e.g. ``{("s", "a"): {"t": "9/10"}}``."""
        states, actions = tuple(states), tuple(actions)
        sidx = {name: i for i, name in enumerate(states)}
        aidx = {name: i for i, name in enumerate(actions)}
        table = {}
        for (s, a), dist in transitions.items():
            if s not in sidx or a not in aidx:
                raise ValidationError(f"unknown state or action in transition ({s}, {a})")
            weights = {}
            for t, p in dist.items():
                if t not in sidx:
                    raise ValidationError(f"transition ({s}, {a}) targets unknown state {t!r}")
                weights[sidx[t]] = p
            try:
                table[(sidx[s], aidx[a])] = SubDistribution(weights)
            except ValidationError as exc:
                raise ValidationError(f"transition ({s}, {a}): {exc}") from None
        return cls(states, actions, table)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def tau(self, s: int, a: int) -> SubDistribution:
        return self.transitions.get((s, a), _ZERO_DIST)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelError(f"unknown state {name!r}") from None

    def action_index(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise ModelError(f"unknown action {name!r}") from None


_ZERO_DIST = SubDistribution()


class PseudoMetric:
    """Dense ``n x n`` matrix of rationals indexed by state.

    Construction only checks shape; use :func:`validate_pseudometric` for
    the axioms, since fixpoint iterates are built before they are checked.
    """

    __slots__ = ("_rows", "names")

    def __init__(self, rows: Sequence[Sequence[object]], names: Sequence[str] | None = None):
        self._rows = tuple(tuple(to_fraction(v) for v in row) for row in rows)
        n = len(self._rows)
        if any(len(row) != n for row in self._rows):
            raise ValueError("metric matrix must be square")
        if names is not None and len(names) != n:
            raise ValueError("names must match matrix size")
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(n))

    @classmethod
    def zero(cls, n: int, names=None) -> "PseudoMetric":
        return cls([[ZERO] * n for _ in range(n)], names)

    @classmethod
    def discrete(cls, n: int, names=None) -> "PseudoMetric":
        return cls([[ZERO if i == j else ONE for j in range(n)] for i in range(n)], names)

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int, int], object], names=None) -> "PseudoMetric":
        """Fill the upper triangle from ``fn`` and mirror it."""
        rows = [[ZERO] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = to_fraction(fn(i, j))
        return cls(rows, names)

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def __call__(self, i: int, j: int) -> Fraction:
        return self._rows[i][j]

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return self._rows[ij[0]][ij[1]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PseudoMetric):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __le__(self, other: "PseudoMetric") -> bool:
        """Pointwise ``<=`` (the reverse of the information order)."""
        return all(a <= b for ra, rb in zip(self._rows, other._rows) for a, b in zip(ra, rb))

    def max_abs_diff(self, other: "PseudoMetric") -> Fraction:
        if self.n != other.n:
            raise ValueError("size mismatch")
        return max((abs(a - b) for ra, rb in zip(self._rows, other._rows) for a, b in zip(ra, rb)),
                   default=ZERO)

    def values(self) -> set[Fraction]:
        return {v for row in self._rows for v in row}

    def __repr__(self) -> str:
        return f"PseudoMetric({[[str(v) for v in row] for row in self._rows]})"


@dataclass(frozen=True)
class Violation:
    kind: str  # "range", "diagonal", "symmetry" or "triangle"
    states: tuple[int, ...]
    detail: str


def validate_pseudometric(d: PseudoMetric) -> list[Violation]:
    """Return every axiom violation; an empty list means ``d`` is a 1-bounded pseudometric.

    The triangle inequality is checked on the upper triangle so an
    asymmetric pair is reported once, as a symmetry violation.
    """
    n = d.n
    out: list[Violation] = []
    for i in range(n):
        for j in range(n):
            v = d(i, j)
            if not ZERO <= v <= ONE:
                out.append(Violation("range", (i, j), f"d({d.names[i]},{d.names[j]}) = {v} not in [0,1]"))
    for i in range(n):
        if d(i, i) != 0:
            out.append(Violation("diagonal", (i,), f"d({d.names[i]},{d.names[i]}) = {d(i, i)}"))
    for i in range(n):
        for j in range(i + 1, n):
            if d(i, j) != d(j, i):
                out.append(Violation("symmetry", (i, j),
                                     f"d({d.names[i]},{d.names[j]}) = {d(i, j)} != {d(j, i)}"))

    def e(i, j):
        return d(min(i, j), max(i, j)) if i != j else ZERO

    for x in range(n):
        for z in range(x + 1, n):
            for y in range(n):
                if y in (x, z):
                    continue
                if e(x, y) + e(y, z) < e(x, z):
                    out.append(Violation(
                        "triangle", (x, y, z),
                        f"d({d.names[x]},{d.names[y]}) + d({d.names[y]},{d.names[z]}) = "
                        f"{e(x, y) + e(y, z)} < {e(x, z)} = d({d.names[x]},{d.names[z]})"))
    return out


class Relation:
    """Finite set of state pairs."""

    __slots__ = ("pairs", "symmetric")

    def __init__(self, pairs: Iterable[tuple[int, int]] = (), symmetric: bool = False):
        pairs = frozenset((int(s), int(t)) for s, t in pairs)
        if symmetric:
            pairs = pairs | frozenset((t, s) for s, t in pairs)
        self.pairs = pairs
        self.symmetric = symmetric

    @classmethod
    def full(cls, n: int) -> "Relation":
        return cls(itertools.product(range(n), repeat=2), symmetric=True)

    @classmethod
    def identity(cls, n: int) -> "Relation":
        return cls(((i, i) for i in range(n)), symmetric=True)

    def image(self, xs: Iterable[int]) -> set[int]:
        """``R(X) = {y | exists x in X: x R y}``."""
        xs = set(xs)
        return {t for s, t in self.pairs if s in xs}

    def transpose(self) -> "Relation":
        return Relation(((t, s) for s, t in self.pairs), self.symmetric)

    def union(self, other: "Relation") -> "Relation":
        return Relation(self.pairs | other.pairs)

    def is_symmetric(self) -> bool:
        return all((t, s) in self.pairs for s, t in self.pairs)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __le__(self, other: "Relation") -> bool:
        return self.pairs <= other.pairs

    def __repr__(self) -> str:
        return f"Relation({sorted(self.pairs)})"


# -- serialization -----------------------------------------------------------

def load_json(text):
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from None


def _name_list(doc, key):
    names = doc.get(key)
    if not isinstance(names, list) or not all(isinstance(x, str) for x in names):
        raise ParseError(f"'{key}' must be a list of strings")
    return names


def parse_lmp(text: bytes | str) -> LMP:
    """Parse the JSON model format.

    ``{"states": [...], "actions": [...], "transitions": [{"from": s,
    "action": a, "to": {t: "p/q"}}, ...]}``. Repeated (from, action) entries
    are summed.
    """
    doc = load_json(text)
    if not isinstance(doc, dict):
        raise ParseError("model must be a JSON object")
    states = _name_list(doc, "states")
    actions = _name_list(doc, "actions")
    entries = doc.get("transitions", [])
    if not isinstance(entries, list):
        raise ParseError("'transitions' must be a list")
    merged: dict[tuple[str, str], dict[str, Fraction]] = {}
    sset, aset = set(states), set(actions)
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict) or not isinstance(entry.get("to", {}), dict):
            raise ParseError(f"transition #{k} must be an object with a 'to' map")
        s, a = entry.get("from"), entry.get("action")
        if s not in sset:
            raise ValidationError(f"transition #{k}: unknown state {s!r}")
        if a not in aset:
            raise ValidationError(f"transition #{k}: unknown action {a!r}")
        slot = merged.setdefault((s, a), {})
        for t, p in entry.get("to", {}).items():
            if t not in sset:
                raise ValidationError(f"transition ({s}, {a}): unknown target state {t!r}")
            q = to_fraction(p)
            if q < 0:
                raise ValidationError(f"transition ({s}, {a}): negative weight {q} to {t!r}")
            slot[t] = slot.get(t, ZERO) + q
    for (s, a), dist in merged.items():
        total = sum(dist.values(), ZERO)
        if total > 1:
            raise ValidationError(f"transition ({s}, {a}): mass {total} exceeds 1 by {total - 1}")
    return LMP.build(states, actions, merged)


def dump_lmp(m: LMP) -> str:
    transitions = []
    for (s, a) in sorted(m.transitions):
        mu = m.transitions[(s, a)]
        transitions.append({
            "from": m.states[s],
            "action": m.actions[a],
            "to": {m.states[t]: format_fraction(w) for t, w in sorted(mu.items())},
        })
    doc = {"states": list(m.states), "actions": list(m.actions), "transitions": transitions}
    return json.dumps(doc, indent=2)


def parse_metric(text: bytes | str) -> PseudoMetric:
    """Parse ``{"states": [...], "entries": [[x, y, "1/4"], ...]}``.

    An entry sets both orientations unless the other orientation is given
    explicitly. Unlisted off-diagonal entries are 1, the diagonal is 0.
    """
    doc = load_json(text)
    if not isinstance(doc, dict):
        raise ParseError("metric must be a JSON object")
    names = _name_list(doc, "states")
    if len(set(names)) != len(names):
        raise ValidationError("duplicate state names")
    idx = {name: i for i, name in enumerate(names)}
    explicit: dict[tuple[int, int], Fraction] = {}
    for k, entry in enumerate(doc.get("entries", [])):
        if not isinstance(entry, list) or len(entry) != 3:
            raise ParseError(f"entry #{k} must be [x, y, value]")
        x, y, v = entry
        if x not in idx or y not in idx:
            raise ValidationError(f"entry #{k}: unknown state in ({x!r}, {y!r})")
        explicit[(idx[x], idx[y])] = to_fraction(v)
    n = len(names)
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if (i, j) in explicit:
                rows[i][j] = explicit[(i, j)]
            elif (j, i) in explicit:
                rows[i][j] = explicit[(j, i)]
            elif i != j:
                rows[i][j] = ONE
    return PseudoMetric(rows, names)


def dump_metric(d: PseudoMetric) -> str:
    entries = [[d.names[i], d.names[j], format_fraction(d(i, j))]
               for i in range(d.n) for j in range(i + 1, d.n)]
    return json.dumps({"states": list(d.names), "entries": entries}, indent=2)


def parse_distribution(text: bytes | str, names: Sequence[str]) -> SubDistribution:
    """Parse ``{"x": "1/5", ...}`` (optionally wrapped as ``{"weights": {...}}``) over ``names``."""
    doc = load_json(text)
    if isinstance(doc, dict) and set(doc) == {"weights"}:
        doc = doc["weights"]
    if not isinstance(doc, dict):
        raise ParseError("distribution must be a JSON object mapping state names to weights")
    idx = {name: i for i, name in enumerate(names)}
    weights = {}
    for name, p in doc.items():
        if name not in idx:
            raise ValidationError(f"distribution references undeclared state {name!r}")
        weights[idx[name]] = p
    return SubDistribution(weights)
