"""Univalent simulations stored as pairs of linear maps.

A simulation of ``source`` by ``target`` is a state map ``G`` and an effect
map ``T``, both ``target.dim x source.dim`` matrices acting on column
vectors: a state ``w`` goes to ``G @ w`` and an effect ``e`` (in dual
coordinates) goes to ``T @ e``. Mixture preservation is automatic for linear
maps, and adequacy on vertex pairs bounds adequacy on every state/effect pair
by bilinearity, so validation only ever looks at vertices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gptctx.core import (
    DimensionError,
    _tol,
    effect_distance,
    make_simplex,
    minimal_tensor,
    pairing_table,
    state_distance,
)


class SimulationError(ValueError):
    """Raised when a map pair is not a simulation at any error level."""


@dataclass
class UnivalentSimulation:
    source: object
    target: object
    state_map: np.ndarray
    effect_map: np.ndarray
    epsilon: float = 0.0

    def __post_init__(self):
        shape = (self.target.dim, self.source.dim)
        self.state_map = np.array(self.state_map, dtype=float).reshape(shape)
        self.effect_map = np.array(self.effect_map, dtype=float).reshape(shape)
        if self.epsilon < 0:
            raise ValueError("claimed epsilon must be non-negative")

    def map_state(self, w):
        return self.state_map @ np.asarray(w, dtype=float)

    def map_effect(self, e):
        return self.effect_map @ np.asarray(e, dtype=float)

    def state_images(self):
        return self.source.state_vertices @ self.state_map.T

    def effect_images(self):
        return self.source.effect_vertices @ self.effect_map.T

    def adequacy_table(self):
        """Deviation ``e.w - T(e).G(w)`` over all (effect vertex, state vertex) pairs."""
        simulated = self.effect_images() @ self.state_images().T
        return pairing_table(self.source) - simulated

    def to_dict(self):
        return {
            "source": self.source.to_dict(),
            "target": self.target.to_dict(),
            "state_map": self.state_map.tolist(),
            "effect_map": self.effect_map.tolist(),
            "epsilon": float(self.epsilon),
        }


@dataclass
class SimulationReport:
    epsilon: float
    state_violations: list = field(default_factory=list)   # (vertex index, distance)
    effect_violations: list = field(default_factory=list)
    zero_preserved: bool = True
    injective: bool = True

    @property
    def is_simulation(self):
        return not self.state_violations and not self.effect_violations and self.zero_preserved


def _check_dims(sim):
    g, t = sim.state_map, sim.effect_map
    want = (sim.target.dim, sim.source.dim)
    if g.shape != want or t.shape != want:
        raise DimensionError("maps of shape %s / %s for a %s simulation" % (g.shape, t.shape, want))


def simulation_report(sim, tol=None) -> SimulationReport:
    tol = _tol(tol)
    _check_dims(sim)
    report = SimulationReport(epsilon=float(np.max(np.abs(sim.adequacy_table()), initial=0.0)))
    for j, img in enumerate(sim.state_images()):
        dist = state_distance(sim.target, img)
        if dist > tol:
            report.state_violations.append((j, dist))
    for k, img in enumerate(sim.effect_images()):
        dist = effect_distance(sim.target, img)
        if dist > tol:
            report.effect_violations.append((k, dist))
    report.zero_preserved = bool(np.all(sim.map_effect(np.zeros(sim.source.dim)) == 0))
    report.injective = images_distinct(sim)
    return report


def images_distinct(sim, threshold=1e-9):
    imgs = sim.state_images()
    diff = imgs[:, None, :] - imgs[None, :, :]
    dist = np.max(np.abs(diff), axis=2)
    np.fill_diagonal(dist, np.inf)
    return bool(np.all(dist > threshold))


def validate_simulation(sim, tol=None) -> float:
    """Observed error of ``sim``; raises :class:`SimulationError` if images leave the target."""
    report = simulation_report(sim, tol)
    if not report.is_simulation:
        parts = []
        if report.state_violations:
            parts.append("state images outside target: %s" % report.state_violations)
        if report.effect_violations:
            parts.append("effect images outside target: %s" % report.effect_violations)
        if not report.zero_preserved:
            parts.append("null effect not preserved")
        raise SimulationError("; ".join(parts))
    return report.epsilon


def identity_simulation(sys):
    eye = np.eye(sys.dim)
    return UnivalentSimulation(sys, sys, eye, eye, 0.0)


def simplex_inclusion(m, k, source=None, target=None):
    """Delta_m -> Delta_k (k >= m) sending delta_i to delta_i and delta_i* to delta_i*."""
    if k < m:
        raise ValueError("cannot include Delta_%d into Delta_%d" % (m, k))
    source = source or make_simplex(m)
    target = target or make_simplex(k)
    inc = np.eye(k, m)
    return UnivalentSimulation(source, target, inc, inc, 0.0)


def simplex_product_iso(m, k):
    """Canonical pair ``(Delta_m (x) Delta_k -> Delta_mk, Delta_mk -> Delta_m (x) Delta_k)``.

    Kronecker order puts ``delta_i (x) delta_j`` at position ``(i-1)k + j``, so
    both directions are the identity matrix on coordinates.
    """
    if m < 1 or k < 1:
        raise ValueError("simplex sizes must be positive")
    prod = minimal_tensor(make_simplex(m), make_simplex(k))
    flat = make_simplex(m * k)
    eye = np.eye(m * k)
    return (UnivalentSimulation(prod, flat, eye, eye, 0.0),
            UnivalentSimulation(flat, prod, eye, eye, 0.0))


def compose(first, second):
    """Run ``first`` (A -> B) then ``second`` (B -> C)."""
    if not first.target.equivalent(second.source):
        raise SimulationError("cannot compose: %s is not %s" % (first.target.label, second.source.label))
    return UnivalentSimulation(
        first.source, second.target,
        second.state_map @ first.state_map,
        second.effect_map @ first.effect_map,
        first.epsilon + second.epsilon,
    )


def tensor_simulations(f, g):
    """Parallel composition ``A1 (x) A2 -> B1 (x) B2`` of two simulations."""
    return UnivalentSimulation(
        minimal_tensor(f.source, g.source),
        minimal_tensor(f.target, g.target),
        np.kron(f.state_map, g.state_map),
        np.kron(f.effect_map, g.effect_map),
        f.epsilon + g.epsilon,
    )


def tensor_with_classical(sim, n):
    """Extend ``sim`` (A -> B) to ``A (x) Delta_n -> B (x) Delta_n`` by the identity on the classical part."""
    ident = identity_simulation(make_simplex(n))
    out = tensor_simulations(sim, ident)
    out.epsilon = sim.epsilon
    return out


def _factor_dim(sys):
    """Split ``A (x) Delta_n`` into ``(A, n)`` using its block layout."""
    blocks = sys.blocks
    if blocks is None or blocks.classical_left:
        raise SimulationError("%s is not of the form A (x) Delta_n" % sys.label)
    return blocks.base, blocks.n


def reduce_composite(sim, k, source=None):
    """From ``A (x) Delta_n -> B`` build ``A -> B (x) Delta_k``.

    The new maps feed ``w (x) delta_1`` through ``sim`` and tag the result with
    ``delta_1``: ``w |-> G(w (x) delta_1) (x) delta_1`` and likewise for
    effects with ``delta_1*``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if source is None:
        source, n = _factor_dim(sim.source)
    else:
        n = sim.source.dim // source.dim
        if source.dim * n != sim.source.dim:
            raise DimensionError("source dimension does not divide the composite dimension")
    e1_n = np.zeros((n, 1))
    e1_n[0, 0] = 1.0
    e1_k = np.zeros((k, 1))
    e1_k[0, 0] = 1.0
    attach = np.kron(np.eye(source.dim), e1_n)
    target = minimal_tensor(sim.target, make_simplex(k))
    return UnivalentSimulation(
        source, target,
        np.kron(sim.state_map @ attach, e1_k),
        np.kron(sim.effect_map @ attach, e1_k),
        sim.epsilon,
    )


def regroup_simulation(b1, m, b2, k):
    """Coordinate shuffle ``(B1 (x) Delta_m) (x) (B2 (x) Delta_k) -> (B1 (x) B2) (x) Delta_mk``."""
    d1, d2 = b1.dim, b2.dim
    # source index order (b1, i, b2, j); target order (b1, b2, i, j)
    perm = np.arange(d1 * m * d2 * k).reshape(d1, m, d2, k).transpose(0, 2, 1, 3).ravel()
    size = perm.size
    mat = np.zeros((size, size))
    mat[np.arange(size), perm] = 1.0
    simplex_m, simplex_k = make_simplex(m), make_simplex(k)
    source = minimal_tensor(minimal_tensor(b1, simplex_m), minimal_tensor(b2, simplex_k))
    target = minimal_tensor(minimal_tensor(b1, b2), make_simplex(m * k))
    return UnivalentSimulation(source, target, mat, mat, 0.0)


def random_state_map(source, target, rng, pieces=2):
    """Random linear map sending every source state into the target state space.

    Built as ``sum_r tau_r phi_r^T`` where the ``phi_r`` are non-negative on
    source states and sum to the unit effect, and each ``tau_r`` is a random
    mixture of target state vertices.
    """
    effects = source.effect_vertices
    tv = target.state_vertices
    out = np.zeros((target.dim, source.dim))
    for _ in range(pieces):
        e = effects[rng.integers(len(effects))]
        for phi in (e, source.unit_effect - e):
            w = rng.exponential(size=len(tv))
            out += np.outer(tv.T @ (w / w.sum()), phi) / pieces
    return out


def random_perturbation(sim, rng, strength=0.2):
    """Seeded perturbation of ``sim`` that keeps every vertex image inside the target.

    States are mixed towards a random state-valued map and effects are
    shrunk towards the null effect; both moves stay inside the convex
    target spaces, so the result is always a simulation with some error.
    """
    s = rng.uniform(0, strength)
    r = rng.uniform(0, strength)
    noise = random_state_map(sim.source, sim.target, rng)
    out = UnivalentSimulation(
        sim.source, sim.target,
        (1 - s) * sim.state_map + s * noise,
        (1 - r) * sim.effect_map,
        0.0,
    )
    out.epsilon = float(np.max(np.abs(out.adequacy_table()), initial=0.0))
    return out
