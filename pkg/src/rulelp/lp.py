"""Rule-selection linear program and its simplex solver.

The model, per head relation with m edges and K candidate rules:

    minimize    sum_i eta_i  +  tau * sum_k neg_k * w_k
    subject to  sum_k cov_ik * w_k + eta_i >= 1        (one row per edge)
                sum_k (1 + |body_k|) * w_k <= kappa    (complexity budget)
                0 <= w_k <= 1,  eta_i >= 0

Solved by a dense bounded-variable primal simplex.  The all-slack start
(w = 0, eta = 1, budget slack = kappa) is always feasible, so there is no
phase one.  Duals come out of the final basis: delta_i >= 0 per edge row
and lam <= 0 for the budget row, satisfying

    red_k = tau * neg_k - sum_i cov_ik * delta_i - (1 + |body_k|) * lam >= 0

for every candidate at optimality.  Problem sizes here are small (tens of
columns after selection, rows bounded by the relation's edge count), which
is why a dense tableau is the simplest exact choice.  The solver interface
is deliberately thin so another engine returning (w, eta, delta, lam,
objective) could be swapped in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Optional, Sequence

import numpy as np

from .rules import Clause, Rule, RuleColumn, RuleSet

FEAS_TOL = 1e-9
OPT_TOL = 1e-7
PIVOT_TOL = 1e-10
WEIGHT_EPS = 1e-6

_LOWER, _UPPER, _BASIC = 0, 1, 2


@dataclass
class LpModel:
    num_edges: int
    coverage: np.ndarray    # float64 (num_edges, K)
    neg: np.ndarray         # float64 (K,)
    complexity: np.ndarray  # float64 (K,)
    tau: float
    kappa: float
    clauses: tuple[Clause, ...]

    @property
    def num_columns(self) -> int:
        return self.coverage.shape[1]


@dataclass
class LpSolution:
    w: np.ndarray
    eta: np.ndarray
    delta: np.ndarray
    lam: float
    objective: float
    status: str              # "optimal" | "iteration-limit"
    iterations: int = 0


def build_lpr(columns: Sequence[RuleColumn], tau: float, kappa: float,
              num_edges: int) -> LpModel:
    """Assemble the LP from rule columns; duplicate bodies are rejected."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if num_edges < 1:
        raise ValueError("model needs at least one edge row")
    seen: set[Clause] = set()
    for col in columns:
        if col.clause in seen:
            raise ValueError(f"duplicate rule body {col.clause.body}")
        seen.add(col.clause)
        if len(col.coverage) != num_edges:
            raise ValueError("coverage length does not match edge count")
    K = len(columns)
    cov = np.zeros((num_edges, K), dtype=np.float64)
    for k, col in enumerate(columns):
        cov[:, k] = col.coverage
    return LpModel(
        num_edges=num_edges,
        coverage=cov,
        neg=np.array([c.neg for c in columns], dtype=np.float64),
        complexity=np.array([float(c.complexity) for c in columns]),
        tau=tau,
        kappa=kappa,
        clauses=tuple(c.clause for c in columns),
    )


def solve(model: LpModel, max_iterations: Optional[int] = None) -> LpSolution:
    """Bounded-variable primal simplex with Dantzig pricing.

    Falls back to Bland's rule after a long run of degenerate pivots so
    termination is guaranteed.  Deterministic: ties in pricing and in the
    ratio test break toward the smallest index.
    """
    m, K = model.num_edges, model.num_columns
    N = K + 2 * m + 1  # w, eta, surplus, budget slack
    if max_iterations is None:
        max_iterations = 1000 + 20 * (m + N)

    A = np.zeros((m + 1, N))
    A[:m, :K] = model.coverage
    A[np.arange(m), K + np.arange(m)] = 1.0          # eta
    A[np.arange(m), K + m + np.arange(m)] = -1.0     # surplus
    A[m, :K] = model.complexity
    A[m, N - 1] = 1.0                                # budget slack
    b = np.ones(m + 1)
    b[m] = model.kappa
    c = np.zeros(N)
    c[:K] = model.tau * model.neg
    c[K:K + m] = 1.0
    upper = np.full(N, np.inf)
    upper[:K] = 1.0

    T = A.copy()
    basis = np.concatenate([K + np.arange(m), [N - 1]])
    stat = np.full(N, _LOWER, dtype=np.int8)
    stat[basis] = _BASIC
    xB = b.copy()
    rc = c - T[np.arange(m), :].sum(axis=0)  # c_B = 1 on eta rows, 0 on budget
    rc[basis] = 0.0

    degen_streak = 0
    bland_after = 3 * (m + 1 + N)
    iters = 0
    status = "iteration-limit"

    while iters < max_iterations:
        at_lower = (stat == _LOWER) & (rc < -OPT_TOL)
        at_upper = (stat == _UPPER) & (rc > OPT_TOL)
        eligible = at_lower | at_upper
        if not eligible.any():
            status = "optimal"
            break
        if degen_streak >= bland_after:
            j = int(np.flatnonzero(eligible)[0])
        else:
            score = np.where(eligible, np.abs(rc), -1.0)
            j = int(np.argmax(score))
        iters += 1

        sign = 1.0 if stat[j] == _LOWER else -1.0
        d = sign * T[:, j]
        # entering variable moves by t >= 0; basic values change by -t*d
        t_bound = upper[j]  # lower bounds are all zero
        basis_upper = upper[basis]
        ratios = np.full(m + 1, np.inf)
        pos = d > PIVOT_TOL
        ratios[pos] = xB[pos] / d[pos]
        neg = (d < -PIVOT_TOL) & np.isfinite(basis_upper)
        ratios[neg] = (basis_upper[neg] - xB[neg]) / (-d[neg])
        t_row = float(ratios.min())

        if t_row < t_bound - PIVOT_TOL:
            # basis change; ties break toward the smallest variable index
            tied = np.flatnonzero(ratios <= t_row + PIVOT_TOL)
            leave = int(tied[np.argmin(basis[tied])])
            leave_to = _LOWER if d[leave] > 0 else _UPPER
            t = max(t_row, 0.0)
        elif np.isfinite(t_bound):
            leave = -1
            t = t_bound
        else:
            raise ArithmeticError("LP unbounded; model is malformed")

        if t < PIVOT_TOL:
            degen_streak += 1
        else:
            degen_streak = 0

        if leave < 0:
            # bound-to-bound flip of the entering variable
            xB -= t * d
            stat[j] = _UPPER if stat[j] == _LOWER else _LOWER
            continue

        xB -= t * d
        enter_val = (0.0 if sign > 0 else upper[j]) + sign * t
        xB[leave] = enter_val
        lv = basis[leave]
        piv = T[leave, j]
        Tr = T[leave] / piv
        colj = T[:, j].copy()
        colj[leave] = 0.0
        T -= np.outer(colj, Tr)
        T[leave] = Tr
        rc -= rc[j] * Tr
        rc[j] = 0.0
        basis[leave] = j
        stat[j] = _BASIC
        stat[lv] = leave_to

    # refresh from the basis inverse to shed accumulated drift; the eta and
    # slack columns of T are exactly B^-1
    Binv = np.empty((m + 1, m + 1))
    Binv[:, :m] = T[:, K:K + m]
    Binv[:, m] = T[:, N - 1]
    rhs = b.copy().astype(np.float64)
    upper_mask = stat == _UPPER
    if upper_mask.any():
        rhs = rhs - A[:, upper_mask] @ upper[upper_mask]
    xB = Binv @ rhs
    cB = c[basis]
    y = cB @ Binv
    rc = c - y @ A
    rc[basis] = 0.0

    x = np.zeros(N)
    x[upper_mask] = upper[upper_mask]
    x[basis] = xB
    w = np.clip(x[:K], 0.0, 1.0)
    eta = np.maximum(x[K:K + m], 0.0)
    delta = np.maximum(y[:m], 0.0)
    lam = min(float(y[m]), 0.0)
    objective = float(model.tau * (model.neg @ w) + eta.sum())
    return LpSolution(w=w, eta=eta, delta=delta, lam=lam,
                      objective=objective, status=status, iterations=iters)


def reduced_cost(column: RuleColumn, delta: np.ndarray, lam: float,
                 tau: float) -> float:
    """Pricing value of a candidate column against a dual solution."""
    return float(tau * column.neg - float(delta @ column.coverage)
                 - column.complexity * lam)


def extract_ruleset(solution: LpSolution, clauses: Sequence[Clause],
                    head: int, weight_eps: float = WEIGHT_EPS) -> RuleSet:
    """Rules whose weight cleared the threshold, in column order."""
    rs = RuleSet(head=head)
    for clause, w in zip(clauses, solution.w):
        if w > weight_eps:
            rs.rules.append(Rule(clause, float(w)))
    return rs


def solve_ipr_bruteforce(columns: Sequence[RuleColumn], kappa: float,
                         num_edges: int) -> tuple[int, list[int]]:
    """Exact 0/1 rule selection by subset enumeration (test oracle).

    Maximizes the number of covered edges subject to the complexity budget;
    returns (uncovered count, chosen column indices).  Intentionally
    limited to tiny instances.
    """
    K = len(columns)
    if K > 20:
        raise ValueError("brute-force oracle limited to 20 columns")
    masks = []
    for col in columns:
        mask = 0
        for i, bit in enumerate(col.coverage):
            if bit:
                mask |= 1 << i
        masks.append(mask)
    cmpl = [col.complexity for col in columns]
    best_cov, best_subset = -1, 0
    for subset in range(1 << K):
        total = 0
        covered = 0
        for k in range(K):
            if subset >> k & 1:
                total += cmpl[k]
                covered |= masks[k]
        if total > kappa:
            continue
        ones = bin(covered).count("1")
        if ones > best_cov:
            best_cov = ones
            best_subset = subset
    chosen = [k for k in range(K) if best_subset >> k & 1]
    return num_edges - best_cov, chosen


def dump_lp(model: LpModel, out: IO[str]) -> None:
    """Write the model in LP text format for cross-checks with other solvers."""
    terms = [f"{model.tau * model.neg[k]:+.12g} w{k}"
             for k in range(model.num_columns)]
    terms += [f"+1 e{i}" for i in range(model.num_edges)]
    out.write("Minimize\n obj: " + " ".join(terms) + "\n")
    out.write("Subject To\n")
    for i in range(model.num_edges):
        row = [f"+{model.coverage[i, k]:.12g} w{k}"
               for k in range(model.num_columns) if model.coverage[i, k]]
        row.append(f"+1 e{i}")
        out.write(f" cov{i}: " + " ".join(row) + " >= 1\n")
    row = [f"+{model.complexity[k]:.12g} w{k}"
           for k in range(model.num_columns)]
    if row:
        out.write(" budget: " + " ".join(row) + f" <= {model.kappa:.12g}\n")
    out.write("Bounds\n")
    for k in range(model.num_columns):
        out.write(f" 0 <= w{k} <= 1\n")
    out.write("End\n")
