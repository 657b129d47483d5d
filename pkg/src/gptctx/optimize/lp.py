"""Thin linear-programming layer over scipy's HiGHS interface.

Everything else in the package builds LPs through :class:`LpBuilder` and
solves them with :func:`solve_lp`, so swapping the backend only touches
this file.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical-failure"

# Post-solve feasibility check on returned solutions.
FEASIBILITY_TOL = 1e-7


@dataclass
class LinearProgram:
    """minimize c @ x subject to equality rows, sensed inequality rows and bounds.

    ``ineq_sense`` holds one of ``"<="`` / ``">="`` per inequality row. Matrices
    may be dense arrays or scipy sparse matrices.
    """

    c: np.ndarray
    A_eq: object = None
    b_eq: np.ndarray | None = None
    A_ineq: object = None
    b_ineq: np.ndarray | None = None
    ineq_sense: list[str] | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        if self.A_eq is not None:
            if self.A_eq.shape[1] != n or self.A_eq.shape[0] != len(self.b_eq):
                raise ValueError("equality block has inconsistent dimensions")
        if self.A_ineq is not None:
            if self.A_ineq.shape[1] != n or self.A_ineq.shape[0] != len(self.b_ineq):
                raise ValueError("inequality block has inconsistent dimensions")
            if self.ineq_sense is None:
                self.ineq_sense = ["<="] * self.A_ineq.shape[0]
            if len(self.ineq_sense) != self.A_ineq.shape[0]:
                raise ValueError("one sense per inequality row required")
            if any(s not in ("<=", ">=") for s in self.ineq_sense):
                raise ValueError("inequality sense must be '<=' or '>='")
        self.lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=float)
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float)
        if self.lb.shape != (n,) or self.ub.shape != (n,):
            raise ValueError("bounds must have one entry per variable")

    @property
    def num_vars(self):
        return self.c.size


@dataclass
class LpResult:
    status: str
    value: float | None = None
    x: np.ndarray | None = None
    message: str = ""

    @property
    def ok(self):
        return self.status == OPTIMAL


def _max_violation(lp, x):
    worst = 0.0
    if lp.A_eq is not None and lp.A_eq.shape[0]:
        worst = max(worst, float(np.max(np.abs(lp.A_eq @ x - lp.b_eq))))
    if lp.A_ineq is not None and lp.A_ineq.shape[0]:
        sign = np.where(np.asarray(lp.ineq_sense) == "<=", 1.0, -1.0)
        worst = max(worst, float(np.max(sign * (lp.A_ineq @ x - lp.b_ineq), initial=0.0)))
    worst = max(worst, float(np.max(lp.lb - x, initial=0.0)), float(np.max(x - lp.ub, initial=0.0)))
    return worst


def solve_lp(lp: LinearProgram) -> LpResult:
    """Solve ``lp`` with HiGHS. Deterministic for a fixed input."""
    A_ub = b_ub = None
    if lp.A_ineq is not None and lp.A_ineq.shape[0]:
        sign = np.where(np.asarray(lp.ineq_sense) == "<=", 1.0, -1.0)
        A_ub = sp.diags(sign) @ sp.csr_matrix(lp.A_ineq)
        b_ub = sign * np.asarray(lp.b_ineq, dtype=float)
    A_eq = b_eq = None
    if lp.A_eq is not None and lp.A_eq.shape[0]:
        A_eq = sp.csr_matrix(lp.A_eq)
        b_eq = np.asarray(lp.b_eq, dtype=float)
    bounds = np.column_stack([lp.lb, lp.ub])
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in bounds]
    try:
        res = linprog(lp.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs")
    except (ValueError, np.linalg.LinAlgError) as exc:
        return LpResult(NUMERICAL_FAILURE, message=str(exc))
    if res.status == 2:
        return LpResult(INFEASIBLE, message=res.message)
    if res.status == 3:
        return LpResult(UNBOUNDED, message=res.message)
    if res.status != 0 or res.x is None:
        return LpResult(NUMERICAL_FAILURE, message=res.message)
    x = np.asarray(res.x, dtype=float)
    if _max_violation(lp, x) > FEASIBILITY_TOL:
        return LpResult(NUMERICAL_FAILURE, message="solution violates constraints")
    return LpResult(OPTIMAL, float(res.fun), x, res.message)


@dataclass
class LpBuilder:
    """Incremental construction of a :class:`LinearProgram`.

    Variables are allocated in blocks and addressed by integer index arrays.
    A constraint is a list of ``(coef, cols)`` terms, where ``coef`` is a
    ``(k, len(cols))`` matrix, plus a length-``k`` right-hand side.
    """

    nvars: int = 0
    _lb: list = field(default_factory=list)
    _ub: list = field(default_factory=list)
    _eq: list = field(default_factory=list)
    _ineq: list = field(default_factory=list)
    _obj: list = field(default_factory=list)

    def variables(self, shape, lb=0.0, ub=np.inf):
        count = int(np.prod(shape))
        idx = np.arange(self.nvars, self.nvars + count).reshape(shape)
        self.nvars += count
        self._lb.append(np.broadcast_to(np.asarray(lb, dtype=float), (count,)).copy())
        self._ub.append(np.broadcast_to(np.asarray(ub, dtype=float), (count,)).copy())
        return idx

    @staticmethod
    def _rows(terms, rhs):
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        k = rhs.size
        parts = []
        for coef, cols in terms:
            coef = np.asarray(coef, dtype=float).reshape(k, -1)
            cols = np.asarray(cols).ravel()
            if coef.shape[1] != cols.size:
                raise ValueError("coefficient block does not match its columns")
            parts.append((coef, cols))
        return parts, rhs

    def add_eq(self, terms, rhs):
        self._eq.append(self._rows(terms, rhs))

    def add_le(self, terms, rhs):
        self._ineq.append(self._rows(terms, rhs))

    def add_ge(self, terms, rhs):
        parts, rhs = self._rows(terms, rhs)
        self._ineq.append(([(-c, cols) for c, cols in parts], -rhs))

    def objective(self, coef, cols):
        self._obj.append((np.asarray(coef, dtype=float).ravel(), np.asarray(cols).ravel()))

    def _assemble(self, blocks):
        rows, cols, vals, rhs = [], [], [], []
        offset = 0
        for parts, b in blocks:
            k = b.size
            for coef, cidx in parts:
                r, c = np.nonzero(coef)
                rows.append(r + offset)
                cols.append(cidx[c])
                vals.append(coef[r, c])
            rhs.append(b)
            offset += k
        if not offset:
            return None, None
        mat = sp.coo_matrix(
            (np.concatenate(vals) if vals else [], (np.concatenate(rows) if rows else [],
                                                     np.concatenate(cols) if cols else [])),
            shape=(offset, self.nvars)).tocsr()
        return mat, np.concatenate(rhs)

    def build(self) -> LinearProgram:
        c = np.zeros(self.nvars)
        for coef, cols in self._obj:
            np.add.at(c, cols, coef)
        A_eq, b_eq = self._assemble(self._eq)
        A_in, b_in = self._assemble(self._ineq)
        lb = np.concatenate(self._lb) if self._lb else np.zeros(0)
        ub = np.concatenate(self._ub) if self._ub else np.zeros(0)
        return LinearProgram(c, A_eq, b_eq, A_in, b_in, None, lb, ub)

    def solve(self) -> LpResult:
        return solve_lp(self.build())
