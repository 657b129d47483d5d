"""Contextuality measures: classical excess, POM value and yield, and hierarchy comparison."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from gptctx.core import make_simplex, minimal_tensor
from gptctx.optimize.pom import seesaw_pom
from gptctx.optimize.seesaw import (
    SeesawConfig,
    SeesawFailure,
    embed_into_larger_simplex,
    search_simulation,
)
from gptctx.simulation import (
    UnivalentSimulation,
    compose,
    regroup_simulation,
    tensor_simulations,
    validate_simulation,
)

STABLE_TOL = 1e-6
HOLDS_TOL = 1e-6
REFUTE_MARGIN = 1e-3
WITNESS_BITS = 2


def classical_pom_bound(n):
    return (n + 1) / (2 * n)


@dataclass
class ExcessEstimate:
    label: str
    m: int
    upper: float
    lower: float
    certificate: UnivalentSimulation | None = None
    failed: bool = False
    message: str = ""
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "system": self.label,
            "m": self.m,
            "upper": None if self.failed else self.upper,
            "lower": self.lower,
            "failed": self.failed,
            "message": self.message,
        }


@dataclass
class ExcessSweep:
    estimates: list
    stabilized_value: float
    stabilized: bool
    witness: float

    def ok_estimates(self):
        return [e for e in self.estimates if not e.failed]

    def upper_at(self, m):
        for e in self.estimates:
            if e.m == m and not e.failed:
                return e.upper
        raise KeyError(m)


def pom_value(A, n, cfg=None):
    """Best validated POM success found on ``A``.

    This is an achievable value, so a lower bound on the true optimum.
    """
    return seesaw_pom(A, n, cfg)


def pom_excess_witness(A, n=WITNESS_BITS, cfg=None):
    """Lower bound on the excess of ``A`` within any simplex from a POM strategy."""
    if n < 2:
        raise ValueError("witness needs n >= 2")
    try:
        value, strategy = seesaw_pom(A, n, cfg)
    except SeesawFailure:
        return 0.0
    return max(0.0, strategy.success() - classical_pom_bound(n))


def classical_excess(A, m_max, cfg=None, *, preserve_unit=False, witness_bits=WITNESS_BITS):
    """Excess upper bounds of ``A`` within ``Delta_1 .. Delta_mMax``.

    Each size is warm-started from the previous certificate pushed into the
    larger simplex, so upper bounds never increase with ``m``. The lower
    bound is the POM witness and does not depend on ``m``.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    cfg = cfg or SeesawConfig()
    witness = pom_excess_witness(A, witness_bits, cfg)
    estimates = []
    previous = None
    for m in range(1, m_max + 1):
        start = time.perf_counter()
        warm = embed_into_larger_simplex(previous, m) if previous is not None else None
        try:
            eps, cert = search_simulation(A, make_simplex(m), cfg, preserve_unit=preserve_unit, warm_start=warm)
        except SeesawFailure as exc:
            estimates.append(ExcessEstimate(A.label, m, np.nan, witness, None, True, str(exc),
                                            time.perf_counter() - start))
            continue
        previous = cert
        estimates.append(ExcessEstimate(A.label, m, min(eps, 1.0), witness, cert,
                                        wall_time=time.perf_counter() - start))
    uppers = [e.upper for e in estimates if not e.failed]
    value = min(uppers) if uppers else np.nan
    tail = estimates[-3:]
    stable = (len(tail) == 3 and not any(e.failed for e in tail)
              and max(e.upper for e in tail) - min(e.upper for e in tail) <= STABLE_TOL)
    return ExcessSweep(estimates, value, stable, witness)


@dataclass
class YieldResult:
    value: float
    per_d: list          # (d, value, strategy digest)
    stabilized: bool


def pom_yield(A, n, d_max, cfg=None):
    """POM value of ``A (x) Delta_d`` for ``d = 1 .. dMax`` and its maximum."""
    if d_max < 1:
        raise ValueError("d_max must be at least 1")
    per_d = []
    for d in range(1, d_max + 1):
        value, strategy = pom_value(minimal_tensor(A, make_simplex(d)), n, cfg)
        per_d.append((d, value, strategy.digest()))
    stable = len(per_d) >= 2 and abs(per_d[-1][1] - per_d[-2][1]) <= STABLE_TOL
    return YieldResult(max(v for _, v, _ in per_d), per_d, stable)


@dataclass
class HierarchyEvidence:
    verdict: str                     # "holds" | "refuted" | "inconclusive"
    source_label: str
    target_label: str
    n_free: int | None = None
    certificate: UnivalentSimulation | None = None
    lower_source: float | None = None
    upper_target: float | None = None
    search_errors: dict = field(default_factory=dict)

    def to_dict(self):
        doc = {
            "verdict": self.verdict,
            "source": self.source_label,
            "target": self.target_label,
            "search_errors": {str(k): v for k, v in sorted(self.search_errors.items())},
        }
        if self.verdict == "holds":
            doc["n_free"] = self.n_free
            doc["epsilon"] = self.certificate.epsilon
            doc["certificate"] = self.certificate.to_dict()
        else:
            doc["lower_source"] = self.lower_source
            doc["upper_target"] = self.upper_target
        return doc


def _grow_free_part(sim, target):
    """Push ``A -> B (x) Delta_(n-1)`` into ``B (x) Delta_n`` by including the classical factor."""
    n = target.blocks.n
    inc = np.kron(np.eye(target.blocks.base.dim), np.eye(n, n - 1))
    return UnivalentSimulation(sim.source, target, inc @ sim.state_map, inc @ sim.effect_map, sim.epsilon)


def _canonical_candidate(A, target):
    """Exact simulation ``A -> B (x) Delta_n`` known in closed form, or ``None``.

    Identity tensored with ``delta_1`` when ``A`` is ``B``; for a simplex
    ``A = Delta_a`` with ``a <= n``, ``delta_i -> w_0 (x) delta_i`` and
    ``delta_i* -> u_B (x) delta_i*``.
    """
    B, n = target.blocks.base, target.blocks.n
    if A.equivalent(B):
        attach = np.kron(np.eye(B.dim), np.eye(n, 1))
        return UnivalentSimulation(A, target, attach, attach)
    if A.is_simplex and A.dim <= n:
        pick = np.eye(n, A.dim)
        return UnivalentSimulation(A, target, np.kron(B.state_vertices[0][:, None], pick),
                                   np.kron(B.unit_effect[:, None], pick))
    return None


def compare(A, B, n_free_max, cfg=None, *, m_max=4, preserve_unit=False):
    """Evidence for or against ``A`` being at most as contextual as ``B``.

    First looks for an exact simulation ``A -> B (x) Delta_n``; failing that,
    refutes when the POM witness of ``A`` exceeds a validated excess upper
    bound of ``B`` by more than the margin.
    """
    if n_free_max < 1:
        raise ValueError("n_free_max must be at least 1")
    cfg = cfg or SeesawConfig()
    errors = {}
    previous = None
    for n in range(1, n_free_max + 1):
        target = minimal_tensor(B, make_simplex(n))
        warm = _canonical_candidate(A, target)
        if warm is None and previous is not None:
            warm = _grow_free_part(previous, target)
        try:
            eps, cert = search_simulation(A, target, cfg, preserve_unit=preserve_unit, warm_start=warm)
        except SeesawFailure:
            errors[n] = None
            continue
        errors[n] = eps
        previous = cert
        if eps <= HOLDS_TOL:
            return HierarchyEvidence("holds", A.label, B.label, n, cert, search_errors=errors)
    lower = pom_excess_witness(A, WITNESS_BITS, cfg)
    upper = classical_excess(B, m_max, cfg, preserve_unit=preserve_unit).stabilized_value
    verdict = "refuted" if lower > upper + REFUTE_MARGIN else "inconclusive"
    return HierarchyEvidence(verdict, A.label, B.label, lower_source=lower, upper_target=upper,
                             search_errors=errors)


def composite_certificate(first, second):
    """Certificate for ``A1 (x) A2`` under ``(B1 (x) B2) (x) Delta_mk`` from two holds verdicts."""
    if first.verdict != "holds" or second.verdict != "holds":
        raise ValueError("both comparisons must hold")
    c1, c2 = first.certificate, second.certificate
    b1, m = c1.target.blocks.base, c1.target.blocks.n
    b2, k = c2.target.blocks.base, c2.target.blocks.n
    joined = tensor_simulations(c1, c2)
    out = compose(joined, regroup_simulation(b1, m, b2, k))
    out.epsilon = validate_simulation(out)
    return out


def noisy_bit_pom_formula(alpha, n):
    alpha = float(alpha)
    if not 0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 1/2]")
    if n < 2:
        raise ValueError("n must be at least 2")
    return (n + 1 - 2 * alpha) / (2 * n)
