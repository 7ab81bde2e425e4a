"""Dense linear programming: a revised simplex with pluggable column
pricing (the column-generation engine behind the schedule solvers) and a
self-contained two-phase simplex for explicit LPs.

Both solvers are generic over the number type: feed ``Fraction`` data with
``eps=0`` for exact arithmetic, or floats with the default tolerances.
Bland's rule breaks all ties, so no cycling-avoidance heuristics are
needed.  A :class:`BasisState` is single-owner mutable during a solve;
solves on distinct states may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

EPS_OPT = 1e-9
REFACTOR_EVERY = 50


class LpError(Exception):
    pass


class Unbounded(LpError):
    pass


class Infeasible(LpError):
    pass


class IterationLimit(LpError):
    """Hit the pivot budget; signals a cycling or scaling bug."""


@dataclass(frozen=True)
class MatchingColumn:
    """One potential timeslot: a set of concurrently schedulable streams."""

    arcs: frozenset


@dataclass(frozen=True)
class ThetaColumn:
    """The max-min throughput variable of the first optimization phase."""


@dataclass(frozen=True)
class ArtificialColumn:
    """Phase-two artificial variable; must be zero at any optimum."""


@dataclass(frozen=True)
class SurplusColumn:
    k: int


@dataclass(frozen=True)
class StandardForm:
    """min f(x) s.t. [columns] x = g, x >= 0, columns priced on demand."""

    nrows: int
    g: tuple
    column_vector: Callable
    cost: Callable


@dataclass
class BasisState:
    """Revised-simplex basis: descriptors, inverse, duals, primal values."""

    columns: list
    binv: list
    x: list
    duals: list = field(default_factory=list)
    pivots: int = 0

    def value_of(self, descriptor) -> object:
        for c, xv in zip(self.columns, self.x):
            if c == descriptor:
                return xv
        return 0


def _identity(n, one=1, zero=0):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def invert(mat: Sequence[Sequence]) -> list:
    """Gauss-Jordan inverse with partial pivoting; works for Fractions."""
    n = len(mat)
    a = [list(row) for row in mat]
    inv = _identity(n, one=_one_like(mat), zero=_zero_like(mat))
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise LpError("singular basis matrix")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        inv[col] = [v / p for v in inv[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return inv


def _one_like(mat):
    x = mat[0][0]
    return x - x + 1 if not isinstance(x, float) else 1.0


def _zero_like(mat):
    x = mat[0][0]
    return x - x if not isinstance(x, float) else 0.0


def _matvec(m, v):
    return [sum(r[j] * v[j] for j in range(len(v)) if v[j] != 0) for r in m]


def _vecmat(v, m):
    n = len(m[0])
    return [sum(v[i] * m[i][j] for i in range(len(v)) if v[i] != 0) for j in range(n)]


def make_basis(form: StandardForm, columns: Sequence) -> BasisState:
    cols = list(columns)
    if len(cols) != form.nrows:
        raise LpError(f"basis needs {form.nrows} columns, got {len(cols)}")
    bmat = [[None] * form.nrows for _ in range(form.nrows)]
    for j, c in enumerate(cols):
        vec = form.column_vector(c)
        for i in range(form.nrows):
            bmat[i][j] = vec[i]
    binv = invert(bmat)
    x = _matvec(binv, list(form.g))
    return BasisState(cols, binv, x)


def _refactor(form: StandardForm, state: BasisState) -> None:
    bmat = [[None] * form.nrows for _ in range(form.nrows)]
    for j, c in enumerate(state.columns):
        vec = form.column_vector(c)
        for i in range(form.nrows):
            bmat[i][j] = vec[i]
    state.binv = invert(bmat)
    state.x = _matvec(state.binv, list(form.g))


def revised_simplex(
    form: StandardForm,
    state: BasisState,
    pricer: Callable,
    *,
    eps: float = EPS_OPT,
    max_iter: Optional[int] = None,
    on_pivot: Optional[Callable] = None,
) -> BasisState:
    """Run column generation until the pricer finds no improving column.

    ``pricer(duals) -> (eta, descriptor)`` returns the minimum reduced cost
    over all columns it can discover and one column attaining it; the loop
    stops when ``eta >= -eps``.  The leaving variable is the lowest-index
    minimum-ratio row (Bland).  ``on_pivot(state)`` fires after each pivot.
    """
    if max_iter is None:
        max_iter = max(100, 10 * form.nrows * form.nrows)
    for _ in range(max_iter):
        fb = [form.cost(c) for c in state.columns]
        state.duals = _vecmat(fb, state.binv)
        eta, col = pricer(state.duals)
        if eta >= -eps:
            return state
        u = form.column_vector(col)
        d = _matvec(state.binv, u)
        ratio = None
        leave = None
        for i in range(form.nrows):
            if d[i] > eps:
                r = state.x[i] / d[i]
                if ratio is None or r < ratio:
                    ratio = r
                    leave = i
        if leave is None:
            raise Unbounded("no leaving column for entering descriptor")
        # pivot: replace row `leave`, update inverse and primal values
        piv = d[leave]
        state.binv[leave] = [v / piv for v in state.binv[leave]]
        xr = state.x[leave] / piv
        for i in range(form.nrows):
            if i != leave and d[i] != 0:
                state.binv[i] = [
                    a - d[i] * b for a, b in zip(state.binv[i], state.binv[leave])
                ]
                state.x[i] = state.x[i] - d[i] * xr
        state.x[leave] = xr
        state.columns[leave] = col
        state.pivots += 1
        if state.pivots % REFACTOR_EVERY == 0:
            _refactor(form, state)
        if on_pivot is not None:
            on_pivot(state)
    raise IterationLimit(f"exceeded {max_iter} pivots")


# ---------------------------------------------------------------------------
# Explicit dense LP: max/min c x s.t. A x (sense) b, x >= 0.


@dataclass(frozen=True)
class LpSolution:
    objective: object
    x: tuple
    duals: tuple  # one per input row; b . duals == objective at optimum


def solve_explicit_lp(
    A: Sequence[Sequence],
    b: Sequence,
    c: Sequence,
    senses: Sequence[str],
    *,
    maximize: bool = False,
    eps: float = EPS_OPT,
    max_iter: Optional[int] = None,
) -> LpSolution:
    """Two-phase tableau simplex with Bland's rule.

    Raises :class:`Infeasible` or :class:`Unbounded`.  Every row receives an
    artificial variable so the phase-1 basis is the identity; the final
    reduced costs at the artificial columns are the dual values.
    """
    m = len(A)
    n = len(c)
    if m != len(b) or m != len(senses):
        raise LpError("inconsistent LP dimensions")
    zero = 0 if not any(isinstance(v, float) for row in A for v in row) else 0.0

    obj = [(-v if maximize else v) for v in c]
    rows = []
    rhs = []
    flipped = []
    for i in range(m):
        row = list(A[i])
        bi = b[i]
        sense = senses[i]
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
            flipped.append(True)
        else:
            flipped.append(False)
        rows.append(row)
        rhs.append(bi)
    # columns: [x (n)] [slack/surplus (one per inequality)] [artificial (m)]
    slack_col = {}
    ncols = n
    for i in range(m):
        sense = senses[i] if not flipped[i] else {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]
        if sense in ("<=", ">="):
            slack_col[i] = ncols
            ncols += 1
    art_col = {}
    for i in range(m):
        art_col[i] = ncols
        ncols += 1

    T = [[zero] * (ncols + 1) for _ in range(m)]
    for i in range(m):
        for j in range(n):
            T[i][j] = rows[i][j]
        sense = senses[i] if not flipped[i] else {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]
        if sense == "<=":
            T[i][slack_col[i]] = 1
        elif sense == ">=":
            T[i][slack_col[i]] = -1
        T[i][art_col[i]] = 1
        T[i][ncols] = rhs[i]

    basis = [art_col[i] for i in range(m)]
    art_set = set(art_col.values())

    def run_phase(cost_vec, banned):
        # reduced-cost row for min cost_vec . x_full
        z = [zero] * (ncols + 1)
        for j in range(ncols + 1):
            z[j] = sum(cost_vec[basis[i]] * T[i][j] for i in range(m)) - (
                cost_vec[j] if j < ncols else zero
            )
        it = 0
        limit = max_iter or max(200, 50 * (m + n) * (m + n))
        while True:
            enter = None
            for j in range(ncols):
                if j in banned:
                    continue
                if z[j] > eps:
                    enter = j
                    break
            if enter is None:
                return z
            ratio = None
            leave = None
            for i in range(m):
                if T[i][enter] > eps:
                    r = T[i][ncols] / T[i][enter]
                    if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                        ratio = r
                        leave = i
            if leave is None:
                raise Unbounded("LP is unbounded")
            piv = T[leave][enter]
            T[leave] = [v / piv for v in T[leave]]
            for i in range(m):
                if i != leave and T[i][enter] != 0:
                    f = T[i][enter]
                    T[i] = [a - f * p for a, p in zip(T[i], T[leave])]
            if z[enter] != 0:
                f = z[enter]
                z = [a - f * p for a, p in zip(z, T[leave])]
            basis[leave] = enter
            it += 1
            if it > limit:
                raise IterationLimit(f"exceeded {limit} pivots")

    # phase 1: min sum of artificials
    cost1 = [zero] * ncols
    for j in art_set:
        cost1[j] = 1
    run_phase(cost1, banned=set())
    infeas = sum(T[i][ncols] for i in range(m) if basis[i] in art_set)
    if infeas > eps:
        raise Infeasible(f"phase-1 residual {infeas}")
    # drive leftover zero-level artificials out of the basis where possible
    for i in range(m):
        if basis[i] in art_set:
            enter = next(
                (j for j in range(ncols) if j not in art_set and T[i][j] != 0), None
            )
            if enter is not None:
                piv = T[i][enter]
                T[i] = [v / piv for v in T[i]]
                for r in range(m):
                    if r != i and T[r][enter] != 0:
                        f = T[r][enter]
                        T[r] = [a - f * p for a, p in zip(T[r], T[i])]
                basis[i] = enter

    cost2 = [zero] * ncols
    for j in range(n):
        cost2[j] = obj[j]
    z = run_phase(cost2, banned=art_set)

    x = [zero] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][ncols]
    objective = sum(obj[j] * x[j] for j in range(n))
    duals = []
    for i in range(m):
        y = z[art_col[i]]
        if flipped[i]:
            y = -y
        duals.append(-y if maximize else y)
    if maximize:
        objective = -objective
    return LpSolution(objective, tuple(x), tuple(duals))
