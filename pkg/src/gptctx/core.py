"""GPT systems as vertex-described polytopes.

A system lives in ``R^d``. States are the convex hull of ``state_vertices``;
effects are the convex hull of ``effect_vertices`` together with the origin,
which is always adjoined implicitly. The pairing is the Euclidean dot
product between effect (dual) coordinates and state coordinates.

Composites with a classical simplex are stored in *block* form: the effect
space of ``A (x) Delta_n`` is every ``sum_j e_j (x) delta_j*`` with each
``e_j`` an effect of ``A``. Its vertex list is materialised lazily since it
grows as ``(|E_A| + 1)^n``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from gptctx.optimize.lp import LpBuilder

DEFAULT_TOL = 1e-9


def set_default_tol(tol):
    """Change the package-wide default tolerance used when ``tol`` is omitted."""
    global DEFAULT_TOL
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    DEFAULT_TOL = float(tol)


def _tol(tol):
    return DEFAULT_TOL if tol is None else tol


class DimensionError(ValueError):
    pass


class MembershipLPError(RuntimeError):
    """A membership LP did not return an optimal solution."""


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _dedupe_rows(rows):
    seen = {}
    for row in rows:
        seen.setdefault(row.tobytes(), row)
    return np.array(list(seen.values()), dtype=float).reshape(-1, rows.shape[1])


@dataclass(frozen=True)
class Blocks:
    """Effect-space layout of ``base (x) Delta_n`` (or ``Delta_n (x) base``)."""

    base: "GptSystem"
    n: int
    classical_left: bool = False

    def indices(self):
        """Coordinate index array for each block, shape ``(n, base.dim)``."""
        d = self.base.dim
        if self.classical_left:
            return np.arange(self.n * d).reshape(self.n, d)
        return np.arange(d * self.n).reshape(d, self.n).T


class GptSystem:
    """Immutable V-represented GPT system.

    Parameters
    ----------
    label : str
    state_vertices : array_like, shape (k, d)
    effect_vertices : array_like, shape (m, d) or None
        Nonzero effect vertices; ``None`` only when ``blocks`` is given.
    unit_effect : array_like, shape (d,)
    blocks : Blocks, optional
        Block layout for composites with a classical factor.
    """

    def __init__(self, label, state_vertices, effect_vertices, unit_effect, *, blocks=None):
        states = np.atleast_2d(np.asarray(state_vertices, dtype=float))
        unit = np.asarray(unit_effect, dtype=float).ravel()
        d = unit.size
        if d < 1:
            raise DimensionError("dimension must be positive")
        if states.shape[1] != d or states.shape[0] < 1:
            raise DimensionError("state vertices must be a non-empty list of %d-vectors" % d)
        self.label = str(label)
        self.state_vertices = _frozen(_dedupe_rows(states))
        self.unit_effect = _frozen(unit)
        self.blocks = blocks
        if blocks is None:
            if effect_vertices is None:
                raise ValueError("effect vertices required for non-block systems")
            eff = np.asarray(effect_vertices, dtype=float).reshape(-1, d) if len(effect_vertices) else np.zeros((0, d))
            eff = eff[np.any(eff != 0, axis=1)]
            self._effects = _frozen(_dedupe_rows(eff))
        else:
            if blocks.base.dim * blocks.n != d:
                raise DimensionError("block layout does not match dimension")
            self._effects = None

    def __repr__(self):
        return "GptSystem(%r, dim=%d, states=%d)" % (self.label, self.dim, len(self.state_vertices))

    @property
    def dim(self):
        return self.unit_effect.size

    @cached_property
    def effect_vertices(self):
        if self._effects is not None:
            return self._effects
        base, n = self.blocks.base, self.blocks.n
        choices = np.vstack([np.zeros(base.dim), base.effect_vertices])
        idx = self.blocks.indices()
        out = []
        for combo in itertools.product(range(len(choices)), repeat=n):
            if not any(combo):
                continue
            v = np.zeros(self.dim)
            for j, c in enumerate(combo):
                v[idx[j]] = choices[c]
            out.append(v)
        return _frozen(np.array(out).reshape(-1, self.dim))

    @property
    def num_effect_vertices(self):
        if self._effects is not None:
            return len(self._effects)
        return (self.blocks.base.num_effect_vertices + 1) ** self.blocks.n - 1

    @cached_property
    def is_simplex(self):
        """True when this system is (a coordinate permutation of) Delta_n."""
        d = self.dim
        states = self.state_vertices
        if states.shape != (d, d) or not np.array_equal(self.unit_effect, np.ones(d)):
            return False
        # permutation matrix
        if not np.all((states == 0) | (states == 1)):
            return False
        if not (np.all(states.sum(axis=0) == 1) and np.all(states.sum(axis=1) == 1)):
            return False
        if self.blocks is not None:
            return self.blocks.base.is_simplex
        if d > 16 or len(self._effects) != 2 ** d - 1:
            return False
        eff = self._effects
        return bool(np.all((eff == 0) | (eff == 1)))

    def equivalent(self, other):
        """Structural equality (same coordinates, same polytopes)."""
        if self is other:
            return True
        if self.dim != other.dim or not np.array_equal(self.unit_effect, other.unit_effect):
            return False
        if not _same_rows(self.state_vertices, other.state_vertices):
            return False
        if self.is_simplex and other.is_simplex:
            return True
        if self.blocks is not None and other.blocks is not None:
            a, b = self.blocks, other.blocks
            if a.n == b.n and a.classical_left == b.classical_left:
                return a.base.equivalent(b.base)
        if self.num_effect_vertices != other.num_effect_vertices:
            return False
        return _same_rows(self.effect_vertices, other.effect_vertices)

    def effect_blocks(self):
        """Flatten the block layout into ``(coordinate indices, base system)`` pairs.

        The effect space is the set of vectors whose restriction to each
        index set is an effect of the corresponding base system. Systems
        without a block layout return a single block covering every
        coordinate.
        """
        if self.blocks is None or self.is_simplex:
            return [(np.arange(self.dim), self)]
        out = []
        for outer in self.blocks.indices():
            for inner, base in self.blocks.base.effect_blocks():
                out.append((outer[inner], base))
        return out

    def to_dict(self):
        return {
            "label": self.label,
            "dim": self.dim,
            "state_vertices": self.state_vertices.tolist(),
            "effect_vertices": self.effect_vertices.tolist(),
            "unit_effect": self.unit_effect.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        missing = {"label", "dim", "state_vertices", "effect_vertices", "unit_effect"} - set(doc)
        if missing:
            raise ValueError("system document missing keys: %s" % ", ".join(sorted(missing)))
        sys = cls(doc["label"], doc["state_vertices"], doc["effect_vertices"], doc["unit_effect"])
        if sys.dim != int(doc["dim"]):
            raise DimensionError("declared dim %s does not match unit effect length %d" % (doc["dim"], sys.dim))
        return sys


def _same_rows(a, b):
    if a.shape != b.shape:
        return False
    return {r.tobytes() for r in a} == {r.tobytes() for r in b}


@dataclass
class Violation:
    invariant: str
    indices: tuple
    magnitude: float


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def add(self, invariant, indices, magnitude):
        self.violations.append(Violation(invariant, tuple(int(i) for i in indices), float(magnitude)))

    def names(self):
        return {v.invariant for v in self.violations}

    def to_dict(self):
        return {
            "passed": self.passed,
            "violations": [
                {"invariant": v.invariant, "indices": list(v.indices), "magnitude": v.magnitude}
                for v in self.violations
            ],
        }


def pairing(effect, state):
    effect = np.asarray(effect, dtype=float)
    state = np.asarray(state, dtype=float)
    if effect.shape != state.shape or effect.ndim != 1:
        raise DimensionError("pairing needs two vectors of equal length, got %s and %s" % (effect.shape, state.shape))
    return float(effect @ state)


def pairing_table(sys):
    """Matrix of ``f . w`` with rows indexed by effect vertices, columns by states."""
    return sys.effect_vertices @ sys.state_vertices.T


def validate_system(sys, tol=None) -> ValidationReport:
    tol = _tol(tol)
    report = ValidationReport()
    states = sys.state_vertices
    d = sys.dim

    table = pairing_table(sys)
    for i, j in zip(*np.nonzero(table < -tol)):
        report.add("pairing-range", (i, j), -table[i, j])
    for i, j in zip(*np.nonzero(table > 1 + tol)):
        report.add("pairing-range", (i, j), table[i, j] - 1)

    unit_vals = states @ sys.unit_effect
    for j in np.nonzero(np.abs(unit_vals - 1) > tol)[0]:
        report.add("unit-normalization", (j,), abs(unit_vals[j] - 1))

    zero_rows = np.nonzero(np.all(np.abs(states) <= tol, axis=1))[0]
    for j in zero_rows:
        report.add("nonzero-states", (j,), 0.0)

    rank_states = np.linalg.matrix_rank(states, tol=max(tol, 1e-12) * 10)
    if rank_states < d:
        report.add("state-span", (), d - rank_states)
    effects_u = np.vstack([sys.effect_vertices, sys.unit_effect])
    rank_effects = np.linalg.matrix_rank(effects_u, tol=max(tol, 1e-12) * 10)
    if rank_effects < d:
        report.add("effect-span", (), d - rank_effects)
    return report


def _check_dim(sys, v):
    v = np.asarray(v, dtype=float).ravel()
    if v.size != sys.dim:
        raise DimensionError("vector of length %d given for a %d-dimensional system" % (v.size, sys.dim))
    return v


def _hull_distance(vertices, v, allow_subnormalized):
    """Max-norm distance from ``v`` to conv(vertices) (or conv(vertices + 0))."""
    b = LpBuilder()
    lam = b.variables(len(vertices))
    s = b.variables(1)
    d = v.size
    ones = np.ones((d, 1))
    # V^T lam - v <= s and v - V^T lam <= s
    b.add_le([(vertices.T, lam), (-ones, s)], v)
    b.add_le([(-vertices.T, lam), (-ones, s)], -v)
    if allow_subnormalized:
        b.add_le([(np.ones(len(vertices)), lam)], 1.0)
    else:
        b.add_eq([(np.ones(len(vertices)), lam)], 1.0)
    b.objective([1.0], s)
    res = b.solve()
    if not res.ok:
        raise MembershipLPError("membership LP ended with status %s" % res.status)
    return res.value


def state_distance(sys, v):
    return _hull_distance(sys.state_vertices, _check_dim(sys, v), False)


def effect_distance(sys, f):
    f = _check_dim(sys, f)
    worst = 0.0
    for idx, base in sys.effect_blocks():
        part = f[idx]
        if base.is_simplex:
            dist = max(0.0, float(np.max(-part)), float(np.max(part - 1)))
        else:
            dist = _hull_distance(base.effect_vertices, part, True)
        worst = max(worst, dist)
    return worst


def state_membership(sys, v, tol=None):
    return state_distance(sys, v) <= _tol(tol)


def effect_membership(sys, f, tol=None):
    return effect_distance(sys, f) <= _tol(tol)


def add_state_constraint(builder, terms, const, sys):
    """Constrain the affine expression ``sum(coef @ x[cols]) + const`` to lie in the state space."""
    const = np.asarray(const, dtype=float)
    if sys.is_simplex:
        builder.add_ge(terms, -const)
        builder.add_eq([(sys.unit_effect @ c, cols) for c, cols in terms], 1.0 - sys.unit_effect @ const)
        return None
    lam = builder.variables(len(sys.state_vertices))
    builder.add_eq(list(terms) + [(-sys.state_vertices.T, lam)], -const)
    builder.add_eq([(np.ones(len(lam)), lam)], 1.0)
    return lam


def add_effect_constraint(builder, terms, const, sys):
    """Constrain an affine expression to lie in the effect space (zero adjoined)."""
    const = np.asarray(const, dtype=float)
    for idx, base in sys.effect_blocks():
        sub = [(np.asarray(c)[idx], cols) for c, cols in terms]
        sub_const = const[idx]
        if base.is_simplex:
            builder.add_ge(sub, -sub_const)
            builder.add_le(sub, 1.0 - sub_const)
        else:
            mu = builder.variables(len(base.effect_vertices))
            builder.add_eq(sub + [(-base.effect_vertices.T, mu)], -sub_const)
            builder.add_le([(np.ones(len(mu)), mu)], 1.0)


def minimal_tensor(a, b, label=None):
    """Minimal composite ``a (x) b`` in Kronecker coordinates.

    States are products of state vertices. When either factor is a simplex,
    the composite carries a block effect layout (so that ``Delta_m (x) Delta_k``
    is exactly ``Delta_mk``); otherwise effect vertices are products of effect
    vertices.
    """
    label = label or "%s(x)%s" % (a.label, b.label)
    states = np.array([np.kron(s, t) for s in a.state_vertices for t in b.state_vertices])
    unit = np.kron(a.unit_effect, b.unit_effect)
    if b.is_simplex:
        return GptSystem(label, states, None, unit, blocks=Blocks(a, b.dim, classical_left=False))
    if a.is_simplex:
        return GptSystem(label, states, None, unit, blocks=Blocks(b, a.dim, classical_left=True))
    effects = np.array([np.kron(e, f) for e in a.effect_vertices for f in b.effect_vertices])
    return GptSystem(label, states, effects, unit)


def make_simplex(n):
    """Classical n-level system: basis states, all 0/1 indicator effects."""
    n = int(n)
    if n < 1:
        raise ValueError("simplex size must be at least 1")
    if n > 16:
        raise ValueError("Delta_%d has too many effect vertices to enumerate" % n)
    effects = np.array(list(itertools.product((0.0, 1.0), repeat=n)))[1:]
    return GptSystem("simplex:%d" % n, np.eye(n), effects, np.ones(n))
