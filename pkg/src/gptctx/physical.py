"""Physical transformations between GPT systems and realisations of simulations.

A physical map ``M`` from system ``B`` to system ``A`` is a ``A.dim x B.dim``
matrix sending states of ``B`` into states of ``A`` whose transpose sends
effects of ``A`` into effects of ``B``. It realises a univalent simulation
``A -> B`` with maps ``(G, T)`` when ``M G v = v`` for every state ``v`` of
``A`` and ``M^T e = T e`` for every effect ``e`` of ``A``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gptctx.core import (
    DimensionError,
    ValidationReport,
    _tol,
    add_effect_constraint,
    add_state_constraint,
    effect_distance,
    make_simplex,
    state_distance,
)
from gptctx.optimize.lp import INFEASIBLE, OPTIMAL, LpBuilder

FEASIBLE = "feasible"
COND_LIMIT = 1e8
REALISATION_TOL = 1e-7


@dataclass
class PhysicalMap:
    source: object      # B
    target: object      # A
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.shape != (self.target.dim, self.source.dim):
            raise DimensionError("map of shape %s between systems of dims %d -> %d"
                                 % (self.matrix.shape, self.source.dim, self.target.dim))

    def apply(self, w):
        return self.matrix @ np.asarray(w, dtype=float)

    def adjoint(self, e):
        return self.matrix.T @ np.asarray(e, dtype=float)


def check_physical_map(pm, tol=None):
    """Vertex-level check of ``M(states of B) in states of A`` and ``M^T(effects of A) in effects of B``."""
    tol = _tol(tol)
    report = ValidationReport()
    for j, w in enumerate(pm.source.state_vertices):
        dist = state_distance(pm.target, pm.apply(w))
        if dist > tol:
            report.add("state-image", (j,), dist)
    for k, e in enumerate(pm.target.effect_vertices):
        dist = effect_distance(pm.source, pm.adjoint(e))
        if dist > tol:
            report.add("effect-preimage", (k,), dist)
    return report


def realisation_residual(matrix, source_states, state_images, source_effects, effect_images):
    """Largest violation of ``M(image) = state`` and ``M^T(effect) = image`` over the given vertices."""
    s = np.abs(state_images @ matrix.T - source_states)
    e = np.abs(source_effects @ matrix - effect_images)
    return float(max(np.max(s, initial=0.0), np.max(e, initial=0.0)))


@dataclass
class RealisationResult:
    status: str                  # "feasible" | "infeasible" | "numerical-failure"
    physical_map: PhysicalMap | None = None
    message: str = ""

    def to_dict(self):
        doc = {"status": self.status}
        if self.physical_map is not None:
            doc["map"] = (self.physical_map.matrix + 0.0).tolist()
        if self.message:
            doc["message"] = self.message
        return doc


def find_realisation(sim, tol=None):
    """Decide by one LP whether a physical map realises the univalent simulation ``sim``.

    ``infeasible`` is returned only when the solver certifies it; any other
    non-optimal outcome is ``numerical-failure``.
    """
    A, B = sim.source, sim.target
    dA, dB = A.dim, B.dim
    b = LpBuilder()
    M = b.variables((dA, dB), lb=-np.inf)
    flat = M.ravel()
    eye_a = np.eye(dA)
    # M (G v) = v, row-major vec: (I (x) x^T) vec(M) = M x
    for v, img in zip(A.state_vertices, sim.state_images()):
        b.add_eq([(np.kron(eye_a, img), flat)], v)
    # M^T e = T e
    for e, img in zip(A.effect_vertices, sim.effect_images()):
        b.add_eq([(np.kron(e[None, :], np.eye(dB)), flat)], img)
    for w in B.state_vertices:
        add_state_constraint(b, [(np.kron(eye_a, w), flat)], np.zeros(dA), A)
    for e in A.effect_vertices:
        add_effect_constraint(b, [(np.kron(e[None, :], np.eye(dB)), flat)], np.zeros(dB), B)
    res = b.solve()
    if res.status == INFEASIBLE:
        return RealisationResult(INFEASIBLE, None, "solver certified infeasibility")
    if res.status != OPTIMAL:
        return RealisationResult("numerical-failure", None, res.message)
    pm = PhysicalMap(B, A, res.x[M].reshape(dA, dB))
    return RealisationResult(FEASIBLE, pm)


def hbb_realisation(sys):
    """Physical map ``Delta_n -> sys`` sending the i-th simplex vertex to the i-th state vertex."""
    n = len(sys.state_vertices)
    return PhysicalMap(make_simplex(n), sys, sys.state_vertices.T.copy())


@dataclass
class SurjectivityReport:
    surjective: bool
    missing: list                # (state vertex index, distance)
    iso_checked: bool
    isomorphism: bool | None
    condition: float | None

    def to_dict(self):
        return {
            "surjective": self.surjective,
            "missing": [[int(i), float(d)] for i, d in self.missing],
            "iso_checked": self.iso_checked,
            "isomorphism": self.isomorphism,
            "condition": self.condition,
        }


def _preimage_distance(matrix, vertices, v):
    """Max-norm distance from ``v`` to ``M(conv(vertices))``."""
    images = vertices @ matrix.T
    b = LpBuilder()
    lam = b.variables(len(vertices))
    s = b.variables(1)
    ones = np.ones((v.size, 1))
    b.add_le([(images.T, lam), (-ones, s)], v)
    b.add_le([(-images.T, lam), (-ones, s)], -v)
    b.add_eq([(np.ones(len(vertices)), lam)], 1.0)
    b.objective([1.0], s)
    res = b.solve()
    return res.value if res.ok else np.inf


def check_surjectivity_and_iso(sim, matrix, tol=None):
    """Check ``M(states of B)`` covers the states of ``A``; with equal dims also check invertibility.

    ``sim`` only supplies the two systems (source ``A``, target ``B``), so
    vertex-level data such as an HBB model works as well.
    """
    tol = _tol(tol)
    A, B = sim.source, sim.target
    matrix = np.asarray(matrix, dtype=float)
    missing = []
    for i, v in enumerate(A.state_vertices):
        dist = _preimage_distance(matrix, B.state_vertices, v)
        if dist > tol:
            missing.append((i, dist))
    if A.dim != B.dim:
        return SurjectivityReport(not missing, missing, False, None, None)
    cond = float(np.linalg.cond(matrix))
    iso = bool(np.linalg.matrix_rank(matrix) == A.dim and cond < COND_LIMIT)
    return SurjectivityReport(not missing, missing, True, iso, cond)
