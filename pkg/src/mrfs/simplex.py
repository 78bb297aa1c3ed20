"""Dense revised simplex for ``min c.x  s.t.  A x <= b, x >= 0``.

Two phases with artificial variables on rows whose right-hand side is
negative.  Pricing is Dantzig's rule; after a run of degenerate pivots the
solver switches to Bland's rule until the objective moves again, which rules
out cycling.  The basis inverse is kept explicitly and refactorized every
``refactor_every`` pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import blas

FEAS_TOL = 1e-9
COST_TOL = 1e-9
PIVOT_TOL = 1e-9


class SimplexError(RuntimeError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    iterations: int


class _Solver:
    def __init__(self, A, b, max_iter, refactor_every, degenerate_limit):
        A = sparse.csr_matrix(A, dtype=float)
        m, n = A.shape
        b = np.asarray(b, dtype=float)
        neg = b < 0
        sign = np.where(neg, -1.0, 1.0)
        # columns: original (n) | slacks (m) | artificials (one per negative row)
        art_rows = np.flatnonzero(neg)
        self.n, self.m, self.n_art = n, m, len(art_rows)
        D = sparse.diags(sign)
        slack = sparse.diags(sign)
        art = sparse.csr_matrix((np.ones(len(art_rows)), (art_rows, np.arange(len(art_rows)))),
                                shape=(m, len(art_rows)))
        self.M = sparse.hstack([D @ A, slack, art]).tocsc()
        self.M.sort_indices()
        self._ptr, self._idx, self._val = self.M.indptr, self.M.indices, self.M.data
        self.b = b * sign
        self.ncol = self.M.shape[1]
        basis = np.arange(n, n + m)
        basis[art_rows] = n + m + np.arange(len(art_rows))
        self.basis = basis
        self.max_iter = max_iter
        self.refactor_every = refactor_every
        self.degenerate_limit = degenerate_limit
        self.iterations = 0
        self._refactor()

    def column(self, q: int) -> np.ndarray:
        """``B^-1 M[:, q]``."""
        lo, hi = self._ptr[q], self._ptr[q + 1]
        return self.Binv[:, self._idx[lo:hi]] @ self._val[lo:hi]

    def _refactor(self) -> None:
        B = self.M[:, self.basis].toarray()
        try:
            self.Binv = np.asfortranarray(np.linalg.inv(B))
        except np.linalg.LinAlgError:
            raise SimplexError("singular basis") from None
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < FEAS_TOL * 1e-3] = 0.0
        self.since_refactor = 0

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> None:
        """Optimize ``cost`` over the current feasible basis; only ``allowed``
        columns may enter."""
        M = self.M
        MT = M.T.tocsr()
        bland = False
        stall = 0
        last_obj = float(cost[self.basis] @ self.xB)
        while True:
            if self.iterations >= self.max_iter:
                raise SimplexError(f"iteration limit {self.max_iter} reached")
            pi = cost[self.basis] @ self.Binv
            d = cost - MT @ pi
            d[~allowed] = 0.0
            d[self.basis] = 0.0
            if bland:
                cand = np.flatnonzero(d < -COST_TOL)
                if cand.size == 0:
                    return
                q = int(cand[0])
            else:
                q = int(np.argmin(d))
                if d[q] >= -COST_TOL:
                    return
            u = self.column(q)
            pos = u > PIVOT_TOL
            if not pos.any():
                raise SimplexError("problem is unbounded")
            ratios = np.full(self.m, np.inf)
            ratios[pos] = np.maximum(self.xB[pos], 0.0) / u[pos]
            theta = ratios.min()
            ties = np.flatnonzero(ratios <= theta + FEAS_TOL * 1e-3)
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(u[ties])])
            self._pivot(r, q, u)
            obj = float(cost[self.basis] @ self.xB)
            if obj < last_obj - 1e-12 * max(1.0, abs(last_obj)):
                stall = 0
                bland = False
                last_obj = obj
            else:
                stall += 1
                if stall >= self.degenerate_limit:
                    bland = True

    def _pivot(self, r: int, q: int, u: np.ndarray) -> None:
        piv = u[r]
        theta = self.xB[r] / piv
        self.xB -= theta * u
        self.xB[r] = theta
        row = self.Binv[r] / piv
        self.Binv = blas.dger(-1.0, u, row, a=self.Binv, overwrite_a=True)
        self.Binv[r] = row
        self.basis[r] = q
        self.iterations += 1
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self._refactor()

    def drive_out_artificials(self) -> None:
        first_art = self.n + self.m
        for r in range(self.m):
            if self.basis[r] < first_art:
                continue
            row = self.Binv[r] @ self.M[:, :first_art]
            row = np.asarray(row).ravel()
            row[self.basis[self.basis < first_art]] = 0.0
            j = np.flatnonzero(np.abs(row) > 1e-7)
            if j.size == 0:
                continue  # redundant row; artificial stays basic at zero
            q = int(j[np.argmax(np.abs(row[j]))])
            u = self.column(q)
            self._pivot(r, q, u)


def solve(c, A, b, *, max_iter: int = 50_000, refactor_every: int = 64,
          degenerate_limit: int = 50) -> SimplexResult:
    """Minimize ``c.x`` subject to ``A x <= b`` and ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    A = sparse.csr_matrix(A, dtype=float)
    m, n = A.shape
    if m == 0:
        if (c < -COST_TOL).any():
            raise SimplexError("problem is unbounded")
        return SimplexResult(np.zeros(n), 0.0, 0)
    s = _Solver(A, b, max_iter, refactor_every, degenerate_limit)
    first_art = n + m
    if s.n_art:
        cost1 = np.zeros(s.ncol)
        cost1[first_art:] = 1.0
        allowed = np.ones(s.ncol, dtype=bool)
        s.run(cost1, allowed)
        s._refactor()
        infeas = float(s.xB[s.basis >= first_art].sum())
        if infeas > FEAS_TOL * max(1.0, float(np.abs(s.b).max())):
            raise SimplexError(f"problem is infeasible (phase one residual {infeas:.3g})")
        s.drive_out_artificials()
        s._refactor()
    cost2 = np.zeros(s.ncol)
    cost2[:n] = c
    allowed = np.zeros(s.ncol, dtype=bool)
    allowed[:first_art] = True
    s.run(cost2, allowed)
    s._refactor()
    full = np.zeros(s.ncol)
    full[s.basis] = s.xB
    x = full[:n]
    x[np.abs(x) < FEAS_TOL * 1e-3] = 0.0
    return SimplexResult(x, float(c @ x), s.iterations)
