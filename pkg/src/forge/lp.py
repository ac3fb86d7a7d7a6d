"""Two-phase primal revised simplex for min c.x s.t. A x >= b, x >= 0.

Sparse constraint matrix, dense working vectors, product-form inverse with
periodic refactorization through a sparse LU of the basis.  Deterministic
throughout: Dantzig pricing with lowest-index tie-breaks, switching to
Bland's rule after a stall, so results are reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .model import StandardFormLP

FEAS_TOL = 1e-7
OPT_TOL = 1e-8
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 100
ITERATION_CAP = 1_000_000


class IterationLimitError(RuntimeError):
    """The simplex hit the hard iteration cap without converging."""


@dataclass
class SolveOutcome:
    status: str                     # "Optimal" | "Infeasible" | "Unbounded"
    x: np.ndarray | None
    objective: float
    iterations: int
    duals: np.ndarray | None = None


class _Basis:
    """Basis inverse as sparse LU plus an eta file of rank-one updates."""

    def __init__(self, cols: sparse.csc_matrix, basis: list[int]):
        self.cols = cols                # all columns of the equality system
        self.basis = basis
        self.etas: list[tuple[int, np.ndarray]] = []
        self._refactor()

    def _refactor(self):
        self.etas = []
        B = self.cols[:, self.basis].tocsc()
        self.lu = splu(B, permc_spec="COLAMD")

    def ftran(self, v: np.ndarray) -> np.ndarray:
        x = self.lu.solve(v)
        for p, eta in self.etas:
            t = x[p]
            if t != 0.0:
                x[p] = 0.0
                x += eta * t
        return x

    def btran(self, w: np.ndarray) -> np.ndarray:
        y = w.astype(float).copy()
        for p, eta in reversed(self.etas):
            y[p] = eta @ y
        return self.lu.solve(y, trans="T")

    def pivot(self, p: int, q: int, d: np.ndarray):
        eta = -d / d[p]
        eta[p] = 1.0 / d[p]
        self.etas.append((p, eta))
        self.basis[p] = q
        if len(self.etas) >= REFACTOR_EVERY:
            self._refactor()


def _simplex_phase(cols: sparse.csc_matrix, colsT: sparse.csr_matrix,
                   costs: np.ndarray, basis: list[int], x_b: np.ndarray,
                   allowed: np.ndarray, iterations: int):
    """Run one simplex phase; returns (status, basis handler, x_b, iterations)."""
    m = x_b.size
    n_total = costs.size
    bh = _Basis(cols, basis)
    stall = 0
    stall_limit = 2 * n_total
    last_obj = np.inf
    while True:
        if iterations >= ITERATION_CAP:
            raise IterationLimitError(f"iteration cap {ITERATION_CAP} reached")
        c_b = costs[bh.basis]
        y = bh.btran(c_b)
        reduced = costs - colsT @ y
        reduced[~allowed] = 0.0
        reduced[bh.basis] = 0.0
        thresh = -OPT_TOL * (1.0 + np.abs(costs))
        candidates = np.nonzero(reduced < thresh)[0]
        if candidates.size == 0:
            return "Optimal", bh, x_b, iterations, y
        if stall > stall_limit:
            q = int(candidates[0])            # Bland: lowest eligible index
        else:
            vals = reduced[candidates]
            best = vals.min()
            q = int(candidates[vals <= best][0])
        d = bh.ftran(cols[:, q].toarray().ravel())
        pos = np.nonzero(d > PIVOT_TOL)[0]
        if pos.size == 0:
            return "Unbounded", bh, x_b, iterations, None
        ratios = x_b[pos] / d[pos]
        theta = ratios.min()
        ties = pos[ratios <= theta + 1e-15]
        # Deterministic leaving choice: lowest basis column index among ties.
        p = int(min(ties, key=lambda i: bh.basis[i]))
        theta = x_b[p] / d[p]
        x_b = x_b - theta * d
        x_b[x_b < 0.0] = 0.0
        x_b[p] = theta
        bh.pivot(p, q, d)
        obj = float(costs[bh.basis] @ x_b)
        if obj < last_obj - 1e-12:
            stall = 0
        else:
            stall += 1
        last_obj = obj
        iterations += 1


def solve(lp: StandardFormLP) -> SolveOutcome:
    """Two-phase primal simplex on the slack-augmented equality form."""
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    need_art = np.nonzero(b > 0.0)[0]
    n_art = need_art.size

    # Equality system columns: structural | -I slacks | +e_i artificials.
    blocks = [A, -sparse.identity(m, format="csc")]
    if n_art:
        art = sparse.csc_matrix(
            (np.ones(n_art), (need_art, np.arange(n_art))), shape=(m, n_art))
        blocks.append(art)
    cols = sparse.hstack(blocks, format="csc")
    colsT = cols.T.tocsr()
    n_total = cols.shape[1]
    art_start = n + m

    basis = [n + i for i in range(m)]
    x_b = -b.copy()
    for k, i in enumerate(need_art):
        basis[i] = art_start + k
        x_b[i] = b[i]

    iterations = 0
    if n_art:
        costs1 = np.zeros(n_total)
        costs1[art_start:] = 1.0
        allowed = np.ones(n_total, dtype=bool)
        status, bh, x_b, iterations, _ = _simplex_phase(
            cols, colsT, costs1, basis, x_b, allowed, iterations)
        phase1_obj = float(costs1[bh.basis] @ x_b)
        if status != "Optimal" or phase1_obj > FEAS_TOL * (1.0 + np.abs(b).max()):
            return SolveOutcome(status="Infeasible", x=None,
                                objective=float("nan"), iterations=iterations)
        # Pivot any artificial still basic (at zero) out of the basis.
        for p in range(m):
            if bh.basis[p] >= art_start:
                row = bh.btran(np.eye(m)[p] if m <= 1 else _unit(m, p))
                alt = colsT[:art_start] @ row
                nz = np.nonzero(np.abs(alt) > 1e-9)[0]
                if nz.size:
                    q = int(nz[0])
                    d = bh.ftran(cols[:, q].toarray().ravel())
                    if abs(d[p]) > PIVOT_TOL:
                        bh.pivot(p, q, d)
        basis = bh.basis
    # Phase 2: artificials may never re-enter.
    costs2 = np.zeros(n_total)
    costs2[:n] = c
    allowed = np.ones(n_total, dtype=bool)
    allowed[art_start:] = False
    status, bh, x_b, iterations, y = _simplex_phase(
        cols, colsT, costs2, basis, x_b, allowed, iterations)
    if status == "Unbounded":
        return SolveOutcome(status="Unbounded", x=None,
                            objective=float("-inf"), iterations=iterations)
    x = np.zeros(n)
    for p, j in enumerate(bh.basis):
        if j < n:
            x[j] = x_b[p]
    return SolveOutcome(status="Optimal", x=x, objective=float(c @ x),
                        iterations=iterations, duals=y)


def _unit(m: int, p: int) -> np.ndarray:
    e = np.zeros(m)
    e[p] = 1.0
    return e


def dual_values(outcome: SolveOutcome, lp: StandardFormLP) -> np.ndarray:
    """Per-row shadow prices of the optimal basis.

    Complementary slackness is asserted: a row with positive slack carries a
    (near-)zero dual, and duals of >= rows are non-negative up to tolerance.
    """
    if outcome.status != "Optimal":
        raise ValueError(f"duals undefined for status {outcome.status}")
    y = outcome.duals
    slack = lp.A @ outcome.x - lp.b
    comp = np.abs(slack * y)
    if comp.max(initial=0.0) > 1e-6 * (1.0 + np.abs(lp.b).max()):
        raise AssertionError("complementary slackness violated")
    return y


def write_lp_text(lp: StandardFormLP) -> str:
    """Render the LP in the classic fixed-section text interchange format."""
    lines = ["Minimize", " obj:"]
    terms = []
    for j, cj in enumerate(lp.c):
        if cj != 0.0:
            terms.append(f" {'+' if cj >= 0 else '-'} {abs(cj):.12g} x{j}")
    lines[-1] += "".join(terms) if terms else " 0 x0"
    lines.append("Subject To")
    A = lp.A.tocsr()
    for i in range(lp.n_rows):
        start, end = A.indptr[i], A.indptr[i + 1]
        row = "".join(
            f" {'+' if v >= 0 else '-'} {abs(v):.12g} x{j}"
            for j, v in zip(A.indices[start:end], A.data[start:end]))
        lines.append(f" c{i}:{row} >= {lp.b[i]:.12g}")
    lines.append("Bounds")
    for j in range(lp.n_vars):
        lines.append(f" 0 <= x{j}")
    lines.append("End")
    return "\n".join(lines) + "\n"
