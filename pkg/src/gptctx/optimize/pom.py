"""Parity-oblivious multiplexing: strategies, see-saw search and the classical oracle.

Bit strings ``x`` are indexed by integers ``0 .. 2^n - 1`` with ``x_1`` the
most significant bit. Bob's effect ``e_y`` is the outcome ``b = 1``; the
``b = 0`` outcome is ``u - e_y``.

Parity obliviousness comes in two strengths. ``"all"`` (the default) hides
every parity ``s . x`` with ``|s| >= 2``; this is the form under which the
classical bound ``(n + 1) / 2n`` holds for every ``n``. ``"xor"`` hides only
the XOR of all ``n`` bits. The two agree for ``n = 2``; for ``n >= 3`` the
weaker ``"xor"`` form lets a classical system beat the bound (``Delta_4``
reaches 5/6 at ``n = 3`` by sending two bits in the clear).
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass

import numpy as np

from gptctx.core import _tol, effect_distance, make_simplex, state_distance
from gptctx.optimize.lp import LpBuilder
from gptctx.optimize.seesaw import SeesawConfig, SeesawFailure, run_restarts


def bit_table(n):
    """``(2^n, n)`` array of bits, row ``x`` holding ``x_1 .. x_n``."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=int)


PARITY_MODES = ("all", "xor")


def parity_signs(n):
    """+1 for even-parity strings, -1 for odd."""
    return 1 - 2 * (bit_table(n).sum(axis=1) % 2)


def parity_constraints(n, parity="all"):
    """Sign rows ``(-1)^(s.x)``; PO holds iff each row annihilates the stacked states."""
    if parity == "xor":
        return parity_signs(n)[None, :]
    if parity != "all":
        raise ValueError("parity mode must be one of %s" % (PARITY_MODES,))
    bits = bit_table(n)
    subsets = [s for s in bit_table(n) if s.sum() >= 2]
    return np.array([1 - 2 * ((bits @ s) % 2) for s in subsets])


@dataclass
class PomStrategy:
    n: int
    states: np.ndarray    # (2^n, d), row x is Alice's state for string x
    effects: np.ndarray   # (n, d), row y is Bob's b = 1 effect for bit y
    unit: np.ndarray
    parity: str = "all"

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.effects = np.asarray(self.effects, dtype=float)
        self.unit = np.asarray(self.unit, dtype=float)
        if self.states.shape[0] != 2 ** self.n or self.effects.shape[0] != self.n:
            raise ValueError("strategy needs 2^n states and n effects")

    def success(self):
        bits = bit_table(self.n)
        p_one = self.states @ self.effects.T                   # (2^n, n)
        p_norm = (self.states @ self.unit)[:, None]
        correct = np.where(bits == 1, p_one, p_norm - p_one)
        return float(correct.sum() / (2 ** self.n * self.n))

    def po_residual(self):
        return float(np.max(np.abs(parity_constraints(self.n, self.parity) @ self.states), initial=0.0))

    def digest(self):
        blob = np.round(np.vstack([self.states, self.effects]), 9) + 0.0
        return hashlib.sha256(blob.tobytes()).hexdigest()[:16]

    def to_dict(self):
        return {"n": self.n, "parity": self.parity,
                "states": self.states.tolist(), "effects": self.effects.tolist()}


def strategy_violations(sys, strategy, tol=None):
    """Membership and parity-obliviousness problems of ``strategy`` on ``sys``."""
    tol = _tol(tol)
    problems = []
    for x, w in enumerate(strategy.states):
        dist = state_distance(sys, w)
        if dist > tol:
            problems.append(("state", x, dist))
    for y, e in enumerate(strategy.effects):
        dist = effect_distance(sys, e)
        if dist > tol:
            problems.append(("effect", y, dist))
    res = strategy.po_residual()
    if res > tol:
        problems.append(("parity-oblivious", -1, res))
    return problems


def best_states(sys, n, effects, parity="all"):
    """States LP: optimal PO-constrained encoding for fixed effects.

    Returns the ``(2^n, d)`` state array, or ``None`` on LP failure.
    """
    bits = bit_table(n)
    N = 2 ** n
    V = sys.state_vertices
    u = sys.unit_effect
    # payoff of sending state w for string x: sum_y [x_y ? e_y : u - e_y] . w / (2^n n)
    payoff = (np.where(bits[:, :, None] == 1, effects[None], u - effects[None]).sum(axis=1)) / (N * n)
    b = LpBuilder()
    lam = b.variables((N, len(V)))
    for x in range(N):
        b.add_eq([(np.ones(len(V)), lam[x])], 1.0)
        b.objective(-(V @ payoff[x]), lam[x])
    rows = parity_constraints(n, parity)
    for signs in rows:
        b.add_eq([(s * V.T, lam[x]) for x, s in enumerate(signs)], np.zeros(sys.dim))
    res = b.solve()
    if not res.ok:
        return None
    weights = res.x[lam]
    weights[weights < 0] = 0.0
    weights /= weights.sum(axis=1, keepdims=True)
    states = weights @ V
    # sign rows are mutually orthogonal, so each residual can be projected out separately
    for signs in rows:
        residual = signs @ states
        if np.any(residual):
            states = states - np.outer(signs, residual) / N
    return states


def best_effect(sys, direction):
    """Maximise ``e . direction`` over the effect space (vertex enumeration per block)."""
    e = np.zeros(sys.dim)
    for idx, base in sys.effect_blocks():
        g = direction[idx]
        if base.is_simplex:
            e[idx] = (g > 0).astype(float)
            continue
        verts = base.effect_vertices
        vals = verts @ g
        k = int(np.argmax(vals))
        if vals[k] > 0:
            e[idx] = verts[k]
    return e


def best_effects(sys, n, states):
    bits = bit_table(n)
    out = np.zeros((n, sys.dim))
    for y in range(n):
        sign = np.where(bits[:, y] == 1, 1.0, -1.0)
        out[y] = best_effect(sys, sign @ states)
    return out


def random_effect(sys, rng):
    e = np.zeros(sys.dim)
    for idx, base in sys.effect_blocks():
        if base.is_simplex:
            e[idx] = rng.uniform(size=len(idx))
            continue
        verts = np.vstack([np.zeros(base.dim), base.effect_vertices])
        w = rng.exponential(size=len(verts))
        e[idx] = (w / w.sum()) @ verts
    return e


def _pom_descend(sys, n, effects, cfg, parity):
    best, best_val = None, -np.inf
    prev = -np.inf
    for _ in range(cfg.max_iters):
        states = best_states(sys, n, effects, parity)
        if states is None:
            break
        effects = best_effects(sys, n, states)
        strat = PomStrategy(n, states, effects, sys.unit_effect, parity)
        val = strat.success()
        if val > best_val:
            best, best_val = strat, val
        if val - prev < cfg.convergence_tol:
            break
        prev = val
    return best


def seesaw_pom(A, n, cfg=None, parity="all"):
    """Best POM strategy found by alternating the states LP and the effects step.

    Returns ``(success, strategy)``; ``success`` is recomputed from the
    returned strategy, which satisfies parity obliviousness and membership.
    """
    if n < 2:
        raise ValueError("POM needs at least two bits")
    cfg = cfg or SeesawConfig()

    def attempt(index):
        rng = np.random.default_rng(cfg.seed + index)
        effects = np.array([random_effect(A, rng) for _ in range(n)])
        strat = _pom_descend(A, n, effects, cfg, parity)
        if strat is None or strategy_violations(A, strat, max(cfg.inner_tol, 1e-9)):
            return None
        return -strat.success(), index, strat

    results = [r for r in run_restarts(attempt, range(cfg.restarts)) if r is not None]
    if not results:
        raise SeesawFailure("no valid POM strategy found for %s" % A.label)
    neg, _, strat = min(results, key=lambda r: (r[0], r[1]))
    return -neg, strat


def _canonical_effect_tuples(d, n):
    """0/1 effect tuples on Delta_d up to relabelling of the d outcomes.

    A tuple is a ``d x n`` 0/1 matrix (column y is e_y); permuting rows
    leaves the optimum unchanged, so sorted row multisets suffice.
    """
    rows = list(itertools.product((0.0, 1.0), repeat=n))
    for combo in itertools.combinations_with_replacement(range(len(rows)), d):
        yield np.array([rows[i] for i in combo]).T


def brute_force_pom_classical(d, n, parity="all"):
    """Exact optimal POM success on ``Delta_d``.

    For fixed states the objective is linear in each ``e_y`` separately, so
    some optimum uses indicator effects; enumerating those and solving the
    states LP for each gives the global optimum.
    """
    if not (1 <= d <= 5 and n in (2, 3)):
        raise ValueError("brute force limited to d <= 5 and n in {2, 3}")
    sys = make_simplex(d)
    best = -np.inf
    for effects in _canonical_effect_tuples(d, n):
        states = best_states(sys, n, effects, parity)
        if states is None:
            raise SeesawFailure("states LP failed for effect tuple %s" % effects.tolist())
        val = PomStrategy(n, states, effects, sys.unit_effect, parity).success()
        if val > best:
            best = val
    return best
