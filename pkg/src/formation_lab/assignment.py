"""Cost matrices for the two arrangement problems and a Hungarian solver.

The solver follows Kuhn's construction: reduce rows and columns (subtracting
constants never changes the optimal permutation), look for a complete set of
independent zeros with a maximum matching, and when the matching is short,
use the minimum vertex cover from Koenig's theorem to create new zeros.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Assignment, Formation, InvalidInputError, as_point, as_points
from .formations import leading_slot

# entries within ZERO_TOL * max(1, max|a|) of zero count as zeros, so the
# returned cost is within n * ZERO_TOL * max(1, max|a|) of the optimum
ZERO_TOL = 1e-12


class CostMode(enum.Enum):
    LEADER = "leader"
    CENTER = "center"


@dataclass(frozen=True)
class CostMatrix:
    entries: np.ndarray
    mode: CostMode = CostMode.CENTER
    # leader mode: (i_lead, leader_slot); center mode: the center C_x
    leader: Optional[int] = None
    leader_slot: Optional[int] = None
    center: Optional[np.ndarray] = None
    # dense row/column index -> robot/slot index (leader mode drops one of each)
    rows: Optional[tuple] = None
    cols: Optional[tuple] = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInputError(f"cost matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("cost matrix has non-finite entries")
        if np.any(a < 0):
            raise InvalidInputError("cost matrix has negative entries")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        n = a.shape[0]
        if self.rows is None:
            object.__setattr__(self, "rows", tuple(range(n)))
        if self.cols is None:
            object.__setattr__(self, "cols", tuple(range(n)))


@dataclass(frozen=True)
class AssignmentResult:
    assignment: Assignment
    total_cost: float


def leader_cost_matrix(initial, f: Formation, i_lead: int, leader_slot: int) -> CostMatrix:
    """(n-1)x(n-1) matrix a_ij = ||(x_i - f_j) - (x_lead - f_lead_slot)||^2 over
    non-leader robots and non-leader slots."""
    x = as_points(initial)
    n = len(x)
    if len(f) != n:
        raise InvalidInputError(f"{n} robots but {len(f)} slots")
    if not (0 <= i_lead < n and 0 <= leader_slot < n):
        raise InvalidInputError("leader or leader slot out of range")
    anchor = x[i_lead] - f.slots[leader_slot]
    rows = tuple(i for i in range(n) if i != i_lead)
    cols = tuple(j for j in range(n) if j != leader_slot)
    diff = (x[list(rows), None, :] - f.slots[None, list(cols), :]) - anchor
    a = np.einsum("ijk,ijk->ij", diff, diff) if rows else np.zeros((0, 0))
    return CostMatrix(a, CostMode.LEADER, leader=i_lead, leader_slot=leader_slot, rows=rows, cols=cols)


def center_cost_matrix(initial, f: Formation, c) -> CostMatrix:
    """n x n matrix a_ij = ||(x_i - f_j) - c||^2."""
    x = as_points(initial)
    if len(f) != len(x):
        raise InvalidInputError(f"{len(x)} robots but {len(f)} slots")
    c = as_point(c)
    diff = (x[:, None, :] - f.slots[None, :, :]) - c
    return CostMatrix(np.einsum("ijk,ijk->ij", diff, diff), CostMode.CENTER, center=c)


def _max_zero_matching(z: np.ndarray, match_col: list) -> list:
    """Grow a maximum matching on the zero pattern ``z`` by augmenting paths.

    ``match_col[j]`` is the row matched to column j or -1; it is updated in
    place and also returned.  Rows and columns are scanned lowest index
    first.
    """
    n = z.shape[0]
    adj = [np.flatnonzero(z[i]).tolist() for i in range(n)]
    match_row = [-1] * n
    for j, i in enumerate(match_col):
        if i >= 0:
            match_row[i] = j

    def augment(i, seen):
        for j in adj[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_col[j] < 0 or augment(match_col[j], seen):
                match_col[j] = i
                match_row[i] = j
                return True
        return False

    for i in range(n):
        if match_row[i] < 0:
            augment(i, [False] * n)
    return match_col


def _min_cover(z: np.ndarray, match_col: list):
    """Koenig: from unmatched rows, follow zero edges to columns and matched
    edges back to rows.  Cover = unreached rows + reached columns."""
    n = z.shape[0]
    matched_rows = {i for i in match_col if i >= 0}
    row_seen = np.zeros(n, bool)
    col_seen = np.zeros(n, bool)
    stack = [i for i in range(n) if i not in matched_rows]
    for i in stack:
        row_seen[i] = True
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(z[i] & ~col_seen):
            col_seen[j] = True
            r = match_col[j]
            if r >= 0 and not row_seen[r]:
                row_seen[r] = True
                stack.append(r)
    return ~row_seen, col_seen


def hungarian(a, tol: float = ZERO_TOL) -> list:
    """Minimum-cost permutation for a square non-negative matrix.

    Returns ``cols`` with ``cols[i]`` the column assigned to row ``i``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return []
    scale = max(1.0, float(np.abs(a).max()))
    eps = tol * scale
    r = a - a.min(axis=1, keepdims=True)
    r -= r.min(axis=0, keepdims=True)
    match_col = [-1] * n
    while True:
        z = r <= eps
        # keep previously matched zeros that are still zeros
        for j, i in enumerate(match_col):
            if i >= 0 and not z[i, j]:
                match_col[j] = -1
        match_col = _max_zero_matching(z, match_col)
        if all(i >= 0 for i in match_col):
            break
        cov_rows, cov_cols = _min_cover(z, match_col)
        free = ~cov_rows[:, None] & ~cov_cols[None, :]
        delta = r[free].min()
        # subtract from uncovered rows, add to covered columns
        r[~cov_rows, :] -= delta
        r[:, cov_cols] += delta
    cols = [0] * n
    for j, i in enumerate(match_col):
        cols[i] = j
    return cols


def hungarian_solve(m: CostMatrix) -> AssignmentResult:
    """Solve the assignment problem held in ``m`` and lift the dense solution
    back to robot/slot indices."""
    a = m.entries
    sol = hungarian(a)
    cost = float(sum(a[i, j] for i, j in enumerate(sol)))
    if m.mode is CostMode.LEADER:
        n = len(sol) + 1
        mapping = [0] * n
        mapping[m.leader] = m.leader_slot
        for i, j in enumerate(sol):
            mapping[m.rows[i]] = m.cols[j]
        return AssignmentResult(Assignment(tuple(mapping), m.leader, m.leader_slot), cost)
    mapping = [0] * len(sol)
    for i, j in enumerate(sol):
        mapping[m.rows[i]] = m.cols[j]
    return AssignmentResult(Assignment(tuple(mapping)), cost)


def assign_with_leader(initial, f: Formation, leader_slot: Optional[int] = None) -> AssignmentResult:
    """Try every robot as the leader standing at the leading slot and keep the
    cheapest arrangement (smallest robot index on ties)."""
    x = as_points(initial)
    n = len(x)
    if n < 2:
        raise InvalidInputError("leader mode needs at least two robots")
    if leader_slot is None:
        leader_slot = leading_slot(f)
    best = None
    for i_lead in range(n):
        res = hungarian_solve(leader_cost_matrix(x, f, i_lead, leader_slot))
        if best is None or res.total_cost < best.total_cost - ZERO_TOL * max(1.0, best.total_cost):
            best = res
    return best


def assign_with_center(initial, f: Formation, c) -> AssignmentResult:
    return hungarian_solve(center_cost_matrix(initial, f, c))


def leader_cost(initial, f: Formation, assignment: Assignment) -> float:
    """Total squared move for a given leader arrangement (leader excluded)."""
    x = as_points(initial)
    d = np.asarray(assignment.mapping)
    anchor = x[assignment.leader] - f.slots[assignment.leader_slot]
    diff = x - f.slots[d] - anchor
    return float(np.sum(diff * diff))
