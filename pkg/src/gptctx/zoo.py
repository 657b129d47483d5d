"""Named example systems and simulations.

All non-classical zoo systems use ``(unit, x, y, ...)`` coordinates, so the
unit effect is the first dual basis vector.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from gptctx.core import GptSystem, make_simplex, pairing_table
from gptctx.simulation import UnivalentSimulation, simplex_inclusion

__all__ = [
    "make_simplex", "make_noisy_bit", "make_toy_bit", "make_toy_bit_model",
    "make_square_gbit", "make_polygon", "bit_in_trit", "hbb_model", "HbbModel",
    "system_from_ref", "ZOO_REFS", "restricted_effect_inclusion",
    "squit_pom_strategy",
]


def make_noisy_bit(alpha):
    alpha = float(alpha)
    if not 0 < alpha <= 0.5:
        raise ValueError("noise parameter must lie in (0, 1/2], got %r" % alpha)
    chi1 = [1 - alpha, alpha]
    chi2 = [alpha, 1 - alpha]
    return GptSystem("noisy-bit:%g" % alpha, np.eye(2), [chi1, chi2, [1.0, 1.0]], [1.0, 1.0])


# order: +x, -x, +y, -y, +z, -z
_TOY_STATES = np.array([
    [1, 1, 0, 0], [1, -1, 0, 0],
    [1, 0, 1, 0], [1, 0, -1, 0],
    [1, 0, 0, 1], [1, 0, 0, -1],
], dtype=float)


def make_toy_bit():
    """Toy bit: octahedron of six states, six axis effects plus the unit."""
    effects = np.vstack([_TOY_STATES / 2, [[1, 0, 0, 0]]])
    return GptSystem("toy-bit", _TOY_STATES, effects, [1, 0, 0, 0])


# ontic support of each toy state, 0-based, same order as _TOY_STATES
_TOY_SUPPORT = [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)]


def make_toy_bit_model():
    """Four-ontic-state noncontextual model of the toy bit, as a simulation into Delta_4."""
    toy = make_toy_bit()
    images = np.zeros((6, 4))
    for row, support in zip(images, _TOY_SUPPORT):
        row[list(support)] = 0.5
    # the six states span R^4, so least squares recovers the unique linear map
    state_map = np.linalg.lstsq(_TOY_STATES, images, rcond=None)[0].T
    effect_images = np.zeros((7, 4))
    for row, support in zip(effect_images, _TOY_SUPPORT):
        row[list(support)] = 1.0
    effect_images[6] = 1.0
    effect_map = np.linalg.lstsq(toy.effect_vertices, effect_images, rcond=None)[0].T
    # entries are multiples of 1/4; drop least-squares round-off
    state_map = np.round(state_map * 4) / 4
    effect_map = np.round(effect_map)
    return UnivalentSimulation(toy, make_simplex(4), state_map, effect_map, 0.0)


def make_square_gbit():
    """Square state space; vertices ordered (++, +-, -+, --)."""
    states = [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]]
    effects = [[0.5, 0.5, 0], [0.5, -0.5, 0], [0.5, 0, 0.5], [0.5, 0, -0.5], [1, 0, 0]]
    return GptSystem("squit", states, effects, [1, 0, 0])


def _dual_vertices(states, tol=1e-9):
    """Vertices of {f : 0 <= f.w <= 1 for every state w} by brute-force enumeration."""
    d = states.shape[1]
    rows = np.vstack([states, states])
    rhs = np.concatenate([np.zeros(len(states)), np.ones(len(states))])
    found = {}
    for combo in itertools.combinations(range(len(rows)), d):
        a = rows[list(combo)]
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        f = np.linalg.solve(a, rhs[list(combo)])
        vals = states @ f
        if np.all(vals >= -tol) and np.all(vals <= 1 + tol):
            f = np.where(np.abs(f) < 1e-13, 0.0, f)
            found.setdefault(tuple(np.round(f, 10)), f)
    return np.array(list(found.values()))


def make_polygon(k):
    """Regular k-gon state space with its full dual effect polytope."""
    k = int(k)
    if k < 3:
        raise ValueError("polygon needs at least 3 vertices")
    angles = 2 * np.pi * np.arange(k) / k
    states = np.column_stack([np.ones(k), np.cos(angles), np.sin(angles)])
    states = np.where(np.abs(states) < 1e-15, 0.0, states)
    effects = _dual_vertices(states)
    return GptSystem("polygon:%d" % k, states, effects, [1, 0, 0])


def bit_in_trit(unit_preserving=False):
    """Delta_2 -> Delta_3 by direct embedding.

    The plain version sends each basis effect to its namesake, so the unit of
    the bit lands on ``delta_1* + delta_2*``. With ``unit_preserving`` the
    second effect goes to ``delta_2* + delta_3*`` instead, which keeps the
    unit and is the version a physical map can realise.
    """
    sim = simplex_inclusion(2, 3)
    if unit_preserving:
        sim.effect_map[2, 1] = 1.0
    return sim


@dataclass
class HbbModel:
    """Vertex-level data of the HBB simulation ``sys -> Delta_n``.

    ``state_images[i]`` is ``delta_i`` for the i-th state vertex; the effect
    side is the linear map ``e |-> (e.w_1, ..., e.w_n)``. The state side is
    only recorded on vertices since it is multi-valued on mixed states.
    """

    source: GptSystem
    target: GptSystem
    state_images: np.ndarray
    effect_map: np.ndarray

    def map_effect(self, e):
        return self.effect_map @ np.asarray(e, dtype=float)

    def effect_images(self):
        return self.source.effect_vertices @ self.effect_map.T

    def adequacy_error(self):
        simulated = self.effect_images() @ self.state_images.T
        return float(np.max(np.abs(pairing_table(self.source) - simulated), initial=0.0))


def hbb_model(sys):
    n = len(sys.state_vertices)
    return HbbModel(sys, make_simplex(n), np.eye(n), sys.state_vertices.copy())


ZOO_REFS = ("simplex:n", "noisy-bit:alpha", "toy-bit", "squit", "polygon:k")


def system_from_ref(ref):
    """Build a zoo system from a name such as ``"simplex:3"`` or ``"noisy-bit:0.25"``."""
    name, _, arg = ref.partition(":")
    if name == "simplex" and arg:
        return make_simplex(int(arg))
    if name == "noisy-bit" and arg:
        return make_noisy_bit(float(arg))
    if name == "polygon" and arg:
        return make_polygon(int(arg))
    if name == "toy-bit" and not arg:
        return make_toy_bit()
    if name in ("squit", "gbit") and not arg:
        return make_square_gbit()
    raise KeyError("unknown zoo system %r (known: %s)" % (ref, ", ".join(ZOO_REFS)))


def restricted_effect_inclusion():
    """Toy bit with only the three ``+`` axis effects, included into the full toy bit.

    Both systems share states; the smaller effect space is a strict subset,
    and the identity matrix realises the inclusion even though its inverse
    is not physical.
    """
    full = make_toy_bit()
    effects = np.vstack([_TOY_STATES[[0, 2, 4]] / 2, [[1, 0, 0, 0]]])
    small = GptSystem("toy-bit:plus-effects", _TOY_STATES, effects, [1, 0, 0, 0])
    eye = np.eye(4)
    return UnivalentSimulation(small, full, eye, eye, 0.0)


def squit_pom_strategy():
    """Perfect two-bit POM strategy on the squit: ``x`` is written into the two square coordinates."""
    from gptctx.optimize.pom import PomStrategy, bit_table

    sq = make_square_gbit()
    signs = 2 * bit_table(2) - 1
    states = np.column_stack([np.ones(4), signs])
    return PomStrategy(2, states, sq.effect_vertices[[0, 2]], sq.unit_effect)
