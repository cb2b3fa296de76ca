"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Meant for the oracle's small linear programs (hundreds of variables at most).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray]
    value: float
    iterations: int


class _Tableau:
    def __init__(self, M: np.ndarray, basis: list, tol: float):
        self.M = M  # last row holds reduced costs, last column the rhs
        self.basis = basis
        self.tol = tol
        self.iterations = 0

    def pivot(self, r: int, c: int) -> None:
        M = self.M
        M[r] /= M[r, c]
        col = M[:, c].copy()
        col[r] = 0.0
        M -= np.outer(col, M[r])
        self.basis[r] = c
        self.iterations += 1

    def run(self, ncols: int, max_iter: int) -> str:
        """Minimise over the first ``ncols`` columns; returns a status string."""
        tol = self.tol
        M = self.M
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            rc = M[-1, :ncols]
            cand = np.flatnonzero(rc < -tol)
            if cand.size == 0:
                return "optimal"
            c = int(cand[0])  # Bland: lowest-index improving column
            col = M[:-1, c]
            rows = np.flatnonzero(col > tol)
            if rows.size == 0:
                return "unbounded"
            ratios = M[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + tol * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))  # Bland: lowest-index leaving var
            self.pivot(r, c)


def linprog_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol: float = 1e-9,
                max_iter: int = 100_000) -> LPResult:
    """Maximise c.x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0."""
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me

    # columns: x (n) | slacks (mu) | artificials (m) | rhs
    ns = n + mu
    M = np.zeros((m + 1, ns + m + 1))
    M[:mu, :n] = A_ub
    M[:mu, n:ns] = np.eye(mu)
    M[:mu, -1] = b_ub
    M[mu:m, :n] = A_eq
    M[mu:m, -1] = b_eq
    neg = M[:m, -1] < 0
    M[:m][neg] *= -1.0

    basis = []
    art_rows = []
    for i in range(m):
        if i < mu and not neg[i]:
            basis.append(n + i)
        else:
            M[i, ns + i] = 1.0
            basis.append(ns + i)
            art_rows.append(i)

    tab = _Tableau(M, basis, tol)
    if art_rows:
        # phase 1: minimise the sum of artificials
        M[-1, :] = 0.0
        for i in art_rows:
            M[-1, :] -= M[i, :]
        for i in art_rows:
            M[-1, ns + i] = 0.0
        tab.run(ns + m, max_iter)
        if -M[-1, -1] > tol * max(1.0, np.abs(M[:m, -1]).max(initial=0.0)):
            return LPResult("infeasible", None, float("nan"), tab.iterations)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= ns:
                nz = np.flatnonzero(np.abs(M[i, :ns]) > tol)
                if nz.size:
                    tab.pivot(i, int(nz[0]))
                    keep.append(i)
            else:
                keep.append(i)
        M = np.vstack([M[keep], M[-1:]])
        tab.M = M
        tab.basis = [tab.basis[i] for i in keep]
        m = len(keep)

    # phase 2 on x and slack columns; artificial columns are frozen out
    M = np.hstack([M[:, :ns], M[:, -1:]])
    tab.M = M
    M[-1, :] = 0.0
    M[-1, :n] = -c
    for i, bv in enumerate(tab.basis):
        if M[-1, bv] != 0.0:
            M[-1, :] -= M[-1, bv] * M[i, :]
    status = tab.run(ns, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, float("inf"), tab.iterations)
    x = np.zeros(ns)
    for i, bv in enumerate(tab.basis):
        x[bv] = M[i, -1]
    x = np.maximum(x[:n], 0.0)
    return LPResult("optimal", x, float(c @ x), tab.iterations)
