"""Bilinear see-saw search for low-error univalent simulations.

The adequacy error ``max |e.w - T(e).G(w)|`` is bilinear in the state map
``G`` and the effect map ``T``. Fixing one side leaves an LP in the other,
so each restart alternates the two LPs until the error stops improving.
Results are always re-validated; the LP objective is never reported.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from gptctx.core import (
    add_effect_constraint,
    add_state_constraint,
    make_simplex,
    pairing_table,
)
from gptctx.optimize.lp import LpBuilder
from gptctx.simulation import (
    SimulationError,
    UnivalentSimulation,
    random_state_map,
    simulation_report,
)


class SeesawFailure(RuntimeError):
    """Every restart ended in an LP failure."""


@dataclass
class SeesawConfig:
    restarts: int = 32
    max_iters: int = 200
    seed: int = 0
    convergence_tol: float = 1e-9
    inner_tol: float = 1e-9
    l1_weight: float = 1.0

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be at least 1")


def thread_count():
    try:
        return max(1, int(os.environ.get("GPTCTX_THREADS", "1")))
    except ValueError:
        return 1


def run_restarts(task, indices, stop_at=None):
    """Run ``task(i)`` for each restart index and return results in index order.

    With ``stop_at`` set, results after the first one whose ``[0]`` entry is
    at most ``stop_at`` are dropped. Work is done in batches of
    ``GPTCTX_THREADS`` so the outcome never depends on scheduling.
    """
    indices = list(indices)
    workers = thread_count()
    results = []
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for start in range(0, len(indices), workers):
            batch = indices[start:start + workers]
            out = list(pool.map(task, batch)) if pool else [task(i) for i in batch]
            for res in out:
                results.append(res)
                if stop_at is not None and res is not None and res[0] <= stop_at:
                    return results
    finally:
        if pool:
            pool.shutdown()
    return results


def _vec_rows(left, right):
    """Rows ``kron(l, r)`` so that ``row @ vec(M) == l @ M @ r`` for row-major ``vec``."""
    return np.einsum("ka,kb->kab", left, right).reshape(len(left), -1)


def _adequacy_rows(b, table, coef, var, l1_weight):
    """Add ``|table - coef @ var| <= t`` and return ``t``.

    With ``l1_weight > 0`` each pair also gets its own slack, and the mean
    slack joins the objective. The pure max-error objective has huge flat
    optimal faces and the LP vertex it returns rarely moves the other side
    of the see-saw; the averaged term breaks those ties.
    """
    flat = table.ravel()
    t = b.variables(1)
    ones = np.ones((flat.size, 1))
    b.add_ge([(coef, var.ravel()), (ones, t)], flat)
    b.add_le([(coef, var.ravel()), (-ones, t)], flat)
    b.objective([1.0], t)
    if l1_weight:
        s = b.variables(flat.size)
        eye = np.eye(flat.size)
        b.add_ge([(coef, var.ravel()), (eye, s)], flat)
        b.add_le([(coef, var.ravel()), (-eye, s)], flat)
        b.objective(np.full(flat.size, l1_weight / flat.size), s)
    return t


def effect_step(source, target, state_map, preserve_unit=False, l1_weight=0.0):
    """Best effect map for a fixed state map. Returns ``(T, objective)`` or ``None``."""
    F, W = source.effect_vertices, source.state_vertices
    sigma = W @ state_map.T
    dT, dS = target.dim, source.dim
    b = LpBuilder()
    T = b.variables((dT, dS), lb=-np.inf)
    eye = np.eye(dT)
    for f in F:
        add_effect_constraint(b, [(np.kron(eye, f), T.ravel())], np.zeros(dT), target)
    if preserve_unit:
        b.add_eq([(np.kron(eye, source.unit_effect), T.ravel())], target.unit_effect)
    k_idx, j_idx = np.meshgrid(np.arange(len(F)), np.arange(len(W)), indexing="ij")
    coef = _vec_rows(sigma[j_idx.ravel()], F[k_idx.ravel()])
    _adequacy_rows(b, pairing_table(source), coef, T, l1_weight)
    res = b.solve()
    if not res.ok:
        return None
    return res.x[T].reshape(dT, dS), res.value


def state_step(source, target, effect_map, l1_weight=0.0):
    """Best state map for a fixed effect map. Returns ``(G, objective)`` or ``None``."""
    F, W = source.effect_vertices, source.state_vertices
    tau = F @ effect_map.T
    dT, dS = target.dim, source.dim
    b = LpBuilder()
    G = b.variables((dT, dS), lb=-np.inf)
    eye = np.eye(dT)
    for w in W:
        add_state_constraint(b, [(np.kron(eye, w), G.ravel())], np.zeros(dT), target)
    k_idx, j_idx = np.meshgrid(np.arange(len(F)), np.arange(len(W)), indexing="ij")
    coef = _vec_rows(tau[k_idx.ravel()], W[j_idx.ravel()])
    _adequacy_rows(b, pairing_table(source), coef, G, l1_weight)
    res = b.solve()
    if not res.ok:
        return None
    return res.x[G].reshape(dT, dS), res.value


def _repair(sim, tol, preserve_unit=False):
    """Pull a nearly valid certificate strictly inside the target.

    LP solutions can overshoot the target polytopes by solver round-off.
    Mixing the state map with the constant map onto the target barycentre
    and the effect map with ``f |-> (f.w0) u/2`` keeps linearity and moves
    every image towards the interior; the adequacy error is recomputed.
    With ``preserve_unit`` the effect anchor is ``f |-> (f.w0) u`` so the unit
    still maps to the unit.
    """
    source, target = sim.source, sim.target
    anchor = target.unit_effect if preserve_unit else target.unit_effect / 2
    centre = target.state_vertices.mean(axis=0)
    w0 = source.state_vertices.mean(axis=0)
    for eta in (1e-9, 1e-8, 1e-7, 1e-6, 1e-5):
        cand = UnivalentSimulation(
            source, target,
            (1 - eta) * sim.state_map + eta * np.outer(centre, source.unit_effect),
            (1 - eta) * sim.effect_map + eta * np.outer(anchor, w0),
        )
        report = simulation_report(cand, tol)
        if report.is_simulation:
            cand.epsilon = report.epsilon
            return cand
    return None


def certify(sim, tol, preserve_unit=False):
    """Validated copy of ``sim`` with ``epsilon`` set to the observed error, or ``None``."""
    report = simulation_report(sim, tol)
    if report.is_simulation:
        out = UnivalentSimulation(sim.source, sim.target, sim.state_map, sim.effect_map, report.epsilon)
        return out
    return _repair(sim, tol, preserve_unit)


def _max_error(source, G, T):
    simulated = (source.effect_vertices @ T.T) @ (source.state_vertices @ G.T).T
    return float(np.max(np.abs(pairing_table(source) - simulated), initial=0.0))


def _descend(source, target, state_map, cfg, preserve_unit, stop_at):
    """One restart: alternate the two LPs from ``state_map``; return the best ``(G, T)``."""
    best, best_err = None, np.inf
    prev = np.inf
    G = state_map
    for _ in range(cfg.max_iters):
        eff = effect_step(source, target, G, preserve_unit, cfg.l1_weight)
        if eff is None:
            break
        T = eff[0]
        st = state_step(source, target, T, cfg.l1_weight)
        if st is None:
            break
        G, objective = st
        err = _max_error(source, G, T)
        if err < best_err:
            best, best_err = (G, T), err
        if prev - objective < cfg.convergence_tol or best_err <= stop_at:
            break
        prev = objective
    return best


def _keeps_unit(sim, tol):
    gap = sim.map_effect(sim.source.unit_effect) - sim.target.unit_effect
    return float(np.max(np.abs(gap))) <= max(tol, 1e-9)


def search_simulation(source, target, cfg=None, *, preserve_unit=False, warm_start=None, stop_at=1e-10):
    """Lowest-error univalent simulation ``source -> target`` found by see-saw.

    Returns ``(epsilon, certificate)`` where ``epsilon`` is the validated
    error of ``certificate``. Restart ``r`` draws its start from a generator
    seeded with ``cfg.seed + r``. A ``warm_start`` simulation is refined first
    and competes with the random restarts.
    """
    cfg = cfg or SeesawConfig()

    def attempt(index):
        if index < 0:
            G0 = warm_start.state_map
        else:
            rng = np.random.default_rng(cfg.seed + index)
            G0 = random_state_map(source, target, rng, pieces=max(2, len(source.effect_vertices)))
        pair = _descend(source, target, G0, cfg, preserve_unit, stop_at)
        if pair is None:
            return None
        cert = certify(UnivalentSimulation(source, target, pair[0], pair[1]), cfg.inner_tol, preserve_unit)
        if cert is None:
            return None
        return cert.epsilon, index, cert

    candidates = []
    if warm_start is not None:
        candidates.append(attempt(-1))
        ws = certify(warm_start, cfg.inner_tol)
        if ws is not None and not (preserve_unit and not _keeps_unit(ws, cfg.inner_tol)):
            candidates.append((ws.epsilon, -2, ws))
    if not any(c is not None and c[0] <= stop_at for c in candidates):
        candidates.extend(run_restarts(attempt, range(cfg.restarts), stop_at))
    candidates = [c for c in candidates if c is not None]
    if not candidates:
        raise SeesawFailure("no restart produced a valid simulation of %s by %s" % (source.label, target.label))
    eps, _, cert = min(candidates, key=lambda c: (c[0], c[1]))
    return eps, cert


def seesaw_excess(A, m, cfg=None, *, preserve_unit=False, warm_start=None):
    """Upper bound on the excess of ``A`` within ``Delta_m`` with its certificate."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return search_simulation(A, make_simplex(m), cfg, preserve_unit=preserve_unit, warm_start=warm_start)


def embed_into_larger_simplex(sim, m):
    """Compose a certificate into ``Delta_k`` with the inclusion ``Delta_k -> Delta_m``."""
    k = sim.target.dim
    if m < k:
        raise SimulationError("cannot shrink the target simplex")
    inc = np.eye(m, k)
    return UnivalentSimulation(sim.source, make_simplex(m), inc @ sim.state_map, inc @ sim.effect_map, sim.epsilon)
