"""Exact linear algebra over the integers.

Everything in this module is arbitrary-precision integer arithmetic on
numpy object arrays; no floating point is used anywhere.  Lattices are
row spaces of integer matrices.  Finitely generated abelian groups are
cokernels Z^n / rowspace(R), described by invariant factors
d_1 | d_2 | ... (0 encodes an infinite cyclic factor, factors equal to 1
are dropped).

The workhorse is a row echelon pass with minimal-absolute-value pivoting
and repeated Euclidean reduction, used for Hermite forms, kernels,
membership tests and left solves.  Smith forms use alternating row and
column elimination with a divisibility fix-up; for large inputs an
independent verification pass recomputes the local invariant valuations
modulo small prime powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np


class OrdistError(Exception):
    """Base class for all package errors."""


class LinalgError(OrdistError):
    pass


class NotSubLattice(LinalgError):
    """Raised when a claimed sublattice has a vector outside the big lattice."""


class GeneratorsInsufficient(LinalgError):
    """Raised when black-box generators do not generate the whole group."""


# ---------------------------------------------------------------------------
# matrices

def _obj_rows(rows: Sequence[Sequence[int]], cols: int) -> list[np.ndarray]:
    out = []
    for r in rows:
        a = np.empty(cols, dtype=object)
        a[:] = [int(x) for x in r]
        out.append(a)
    return out


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix; equality ignores the storage tag."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]
    storage: str = field(default="dense", compare=False)

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise LinalgError("negative matrix dimensions")
        if len(self.entries) != self.rows:
            raise LinalgError("row count mismatch")
        for r in self.entries:
            if len(r) != self.cols:
                raise LinalgError("column count mismatch")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [tuple(int(x) for x in r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return IntMatrix(len(rows), cols, tuple(rows))

    @staticmethod
    def from_sparse(rows: int, cols: int, entries: dict) -> "IntMatrix":
        """Build from {(i, j): value}; unset positions are zero."""
        data = [[0] * cols for _ in range(rows)]
        for (i, j), v in entries.items():
            data[i][j] = int(v)
        return IntMatrix(rows, cols, tuple(tuple(r) for r in data), storage="sparse")

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @staticmethod
    def zeros(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix(rows, cols, tuple(tuple(0 for _ in range(cols)) for _ in range(rows)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows,
                         tuple(tuple(self.entries[i][j] for i in range(self.rows))
                               for j in range(self.cols)))

    def to_obj(self) -> list[np.ndarray]:
        return _obj_rows(self.entries, self.cols)

    # plain text serialization: header "rows cols", then one row per line,
    # base-10, space separated.  Round-trips bit exactly.
    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        for r in self.entries:
            lines.append(" ".join(str(x) for x in r))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "IntMatrix":
        lines = [ln for ln in text.strip().splitlines()]
        if not lines:
            raise LinalgError("empty matrix text")
        head = lines[0].split()
        if len(head) != 2:
            raise LinalgError("bad matrix header")
        rows, cols = int(head[0]), int(head[1])
        if len(lines) != rows + 1:
            raise LinalgError("bad matrix body")
        data = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != cols:
                raise LinalgError("bad matrix row length")
            data.append(tuple(int(x) for x in parts))
        return IntMatrix(rows, cols, tuple(data))


def _obj_matrix(mat: IntMatrix) -> np.ndarray:
    M = np.empty((mat.rows, mat.cols), dtype=object)
    for i, r in enumerate(mat.entries):
        M[i, :] = list(r)
    return M


def _rows_of(mat) -> tuple[list[np.ndarray], int]:
    """Accept IntMatrix or a sequence of int rows; return obj rows and width."""
    if isinstance(mat, IntMatrix):
        return mat.to_obj(), mat.cols
    rows = list(mat)
    if not rows:
        return [], 0
    cols = len(rows[0])
    return _obj_rows(rows, cols), cols


# ---------------------------------------------------------------------------
# echelon core

_GROWTH_LIMIT = 1 << 96

# side length beyond which snf_invariants re-verifies itself modularly
_VERIFY_DIM = 500


def _row_content(row: np.ndarray) -> int:
    g = 0
    for x in row.tolist():
        if x:
            g = math.gcd(g, x)
            if g == 1:
                return 1
    return g


def _echelon(rows: list[np.ndarray], col_start: int, col_stop: int,
             gcd_rows: bool = False) -> tuple[list[tuple[int, np.ndarray]], list[np.ndarray]]:
    """Row echelon over Z on columns [col_start, col_stop).

    Rows must have zero entries in any column left of col_start that has
    already been pivoted; every arithmetic operation works on the slice
    row[col:] so callers must keep augmented blocks to the right.  When
    gcd_rows is set, rows are divided by their content when entries grow
    past a threshold (contents are harmless for kernel extraction but
    would change the row lattice, so plain HNF keeps them).

    Returns (pivots, rest): pivots is a list of (column, row) with
    positive pivot entries, rest the rows that are zero on the whole
    column range.
    """
    active = list(rows)
    pivots = []
    for col in range(col_start, col_stop):
        cand = [i for i, r in enumerate(active) if r[col] != 0]
        if not cand:
            continue
        while True:
            best = min(cand, key=lambda i: abs(int(active[i][col])))
            bv = active[best][col]
            if bv < 0:
                np.negative(active[best], out=active[best])
                bv = -bv
            if len(cand) == 1:
                break
            nxt = [best]
            prow = active[best]
            pslice = prow[col:]
            for i in cand:
                if i == best:
                    continue
                r = active[i]
                q = r[col] // bv
                if q:
                    r[col:] -= q * pslice
                    if gcd_rows and abs(r[col]) > _GROWTH_LIMIT:
                        g = _row_content(r)
                        if g > 1:
                            np.floor_divide(r, g, out=r)
                if r[col] != 0:
                    nxt.append(i)
            cand = nxt
            if len(cand) == 1:
                break
        prow = active[cand[0]]
        if gcd_rows:
            g = _row_content(prow)
            if g > 1:
                np.floor_divide(prow, g, out=prow)
        del active[cand[0]]
        pivots.append((col, prow))
    return pivots, active


def _reduce_above(pivots: list[tuple[int, np.ndarray]]) -> None:
    """Make entries above each pivot lie in [0, pivot); canonical HNF."""
    for k in range(1, len(pivots)):
        col, prow = pivots[k]
        pv = prow[col]
        for j in range(k):
            r = pivots[j][1]
            q = r[col] // pv
            if q:
                r[col:] -= q * prow[col:]


def hnf(A) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form H = U A with U unimodular.

    H has positive pivots, entries above each pivot reduced into
    [0, pivot), and zero rows at the bottom.
    """
    mat = A if isinstance(A, IntMatrix) else IntMatrix.from_rows(A)
    n, c = mat.rows, mat.cols
    aug = [list(row) + [1 if k == i else 0 for k in range(n)]
           for i, row in enumerate(mat.entries)]
    rows = _obj_rows(aug, c + n)
    pivots, rest = _echelon(rows, 0, c)
    _reduce_above(pivots)
    ordered = [p for _, p in pivots] + rest
    H = IntMatrix.from_rows([tuple(int(x) for x in r[:c]) for r in ordered], c)
    U = IntMatrix.from_rows([tuple(int(x) for x in r[c:]) for r in ordered], n)
    return H, U


def hnf_basis(rows_or_mat) -> list[tuple[int, ...]]:
    """Canonical HNF basis of the lattice spanned by the given rows
    (zero rows dropped)."""
    rows, cols = _rows_of(rows_or_mat)
    pivots, _ = _echelon(rows, 0, cols)
    _reduce_above(pivots)
    return [tuple(int(x) for x in p) for _, p in pivots]


def _back_substitute(pivots: list[tuple[int, np.ndarray]], target: np.ndarray):
    """Write target as an integer combination of echelon rows.

    Returns the coefficient list or None when target is not in the row
    lattice.  target is consumed.
    """
    coeffs = []
    for col, prow in pivots:
        t = target[col]
        pv = prow[col]
        q, rem = divmod(int(t), int(pv))
        if rem:
            return None
        if q:
            target[col:] -= q * prow[col:]
        coeffs.append(q)
    if any(x != 0 for x in target.tolist()):
        return None
    return coeffs


def solve_left(A, b: Sequence[int]):
    """One integer solution x of x A = b, or None.

    A may be an IntMatrix or a row sequence.
    """
    rows, cols = _rows_of(A)
    n = len(rows)
    aug = []
    for i, r in enumerate(rows):
        a = np.empty(cols + n, dtype=object)
        a[:cols] = r
        a[cols:] = [1 if k == i else 0 for k in range(n)]
        aug.append(a)
    pivots, _ = _echelon(aug, 0, cols)
    t = np.empty(cols, dtype=object)
    t[:] = [int(x) for x in b]
    coeffs = _back_substitute([(c, p[:cols]) for c, p in pivots], t)
    if coeffs is None:
        return None
    x = [0] * n
    for q, (_, prow) in zip(coeffs, pivots):
        if q:
            for k in range(n):
                x[k] += q * int(prow[cols + k])
    return x


def lattice_rank(rows_or_mat) -> int:
    rows, cols = _rows_of(rows_or_mat)
    pivots, _ = _echelon(rows, 0, cols, gcd_rows=True)
    return len(pivots)


def in_lattice(basis_pivots, vec) -> bool:
    t = np.empty(len(vec), dtype=object)
    t[:] = [int(x) for x in vec]
    return _back_substitute(basis_pivots, t) is not None


# ---------------------------------------------------------------------------
# Smith normal form

def _min_abs_position(M: np.ndarray, t: int):
    """Position of a minimal-|value| nonzero entry of M[t:, t:], or None."""
    block = M[t:, t:]
    if block.size == 0:
        return None
    try:
        a = np.abs(block.astype(float))
    except OverflowError:
        # entries beyond float range: exact elementwise scan
        a = np.frompyfunc(lambda x: float(min(abs(x), 1 << 1020)), 1, 1)(
            block).astype(float)
    a[a == 0.0] = np.inf
    flat = int(np.argmin(a))
    i, j = divmod(flat, block.shape[1])
    if block[i, j] == 0:
        return None
    return t + i, t + j


def _snf_core(M: np.ndarray, nrows: int, ncols: int,
              on_row: Callable | None, on_col: Callable | None) -> list[int]:
    """In-place Smith elimination; reports row/column operations through
    the optional callbacks so transforms can be accumulated."""

    def row_sub(i, j, q):  # row_i -= q * row_j
        M[i, :] -= q * M[j, :]
        if on_row:
            on_row("sub", i, j, q)

    def row_swap(i, j):
        M[[i, j], :] = M[[j, i], :]
        if on_row:
            on_row("swap", i, j, 0)

    def row_neg(i):
        np.negative(M[i, :], out=M[i, :])
        if on_row:
            on_row("neg", i, i, 0)

    def col_sub(i, j, q):  # col_i -= q * col_j
        M[:, i] -= q * M[:, j]
        if on_col:
            on_col("sub", i, j, q)

    def col_swap(i, j):
        M[:, [i, j]] = M[:, [j, i]]
        if on_col:
            on_col("swap", i, j, 0)

    diag = []
    t = 0
    limit = min(nrows, ncols)
    while t < limit:
        pos = _min_abs_position(M, t)
        if pos is None:
            break
        i, j = pos
        if i != t:
            row_swap(t, i)
        if j != t:
            col_swap(t, j)
        while True:
            # clear column t, re-pivoting on any smaller remainder
            moved = False
            for i in range(t + 1, nrows):
                v = M[i, t]
                if v:
                    q = v // M[t, t]
                    if q:
                        row_sub(i, t, q)
                    if M[i, t]:
                        row_swap(t, i)
                        moved = True
            if moved:
                continue
            for j in range(t + 1, ncols):
                v = M[t, j]
                if v:
                    q = v // M[t, t]
                    if q:
                        col_sub(j, t, q)
                    if M[t, j]:
                        col_swap(t, j)
                        moved = True
            if moved:
                continue
            break
        if M[t, t] < 0:
            row_neg(t)
        # divisibility fix-up: pivot must divide every remaining entry
        pv = int(M[t, t])
        fixed = True
        if pv != 1 and t + 1 < nrows and t + 1 < ncols:
            rem = M[t + 1:, t + 1:] % pv
            bad_rows = np.nonzero(rem.any(axis=1))[0]
            if bad_rows.size:
                # add the offending row to row t, then re-eliminate
                row_sub(t, t + 1 + int(bad_rows[0]), -1)
                fixed = False
        if not fixed:
            continue
        diag.append(pv)
        t += 1
    return diag


def snf(A) -> tuple[list[int], IntMatrix, IntMatrix]:
    """Smith normal form: returns (d, L, R) with L A R = diag(d),
    L and R unimodular, and d_1 | d_2 | ... nonnegative."""
    mat = A if isinstance(A, IntMatrix) else IntMatrix.from_rows(A)
    n, c = mat.rows, mat.cols
    M = _obj_matrix(mat)
    L = _obj_matrix(IntMatrix.identity(n))
    R = _obj_matrix(IntMatrix.identity(c))

    def on_row(kind, i, j, q):
        if kind == "sub":
            L[i, :] -= q * L[j, :]
        elif kind == "swap":
            L[[i, j], :] = L[[j, i], :]
        else:
            np.negative(L[i, :], out=L[i, :])

    # column ops act on R from the right
    def on_col(kind, i, j, q):
        if kind == "sub":
            R[:, i] -= q * R[:, j]
        else:
            R[:, [i, j]] = R[:, [j, i]]

    diag = _snf_core(M, n, c, on_row, on_col)
    Lm = IntMatrix.from_rows([tuple(int(x) for x in r) for r in L], n)
    Rm = IntMatrix.from_rows([tuple(int(x) for x in r) for r in R], c)
    return diag, Lm, Rm


def snf_invariants(A, verify: bool | None = None) -> list[int]:
    """Nonzero part of the Smith diagonal (no transforms kept).

    For large matrices an independent pass recomputes the invariant
    valuations at every prime dividing the result, by Smith elimination
    over Z/p^k, and raises LinalgError on disagreement.
    """
    mat = A if isinstance(A, IntMatrix) else IntMatrix.from_rows(A)
    M = _obj_matrix(mat)
    diag = _snf_core(M, mat.rows, mat.cols, None, None)
    if verify is None:
        verify = max(mat.rows, mat.cols) > _VERIFY_DIM
    if verify and diag:
        for p in sorted(_prime_divisors(math.prod(d for d in diag if d))):
            want = [_val(d, p) for d in diag]
            got = _snf_local_valuations(mat, p, max(want))
            if got != want:
                raise LinalgError(
                    f"smith verification failed at p={p}: {got} != {want}")
    return diag


def _prime_divisors(n: int) -> set[int]:
    n = abs(n)
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.add(n)
    return out


def _val(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _snf_local_valuations(mat: IntMatrix, p: int, vmax: int) -> list[int]:
    """p-adic valuations of the invariant factors, by layered elimination
    over Z/p^K with K > vmax.  Independent of the integer elimination
    path: at each valuation layer, unit pivots are cleared by a Schur
    complement update, then the remaining block (all divisible by p) is
    divided by p and the layer advances."""
    K = vmax + 2
    mod = p ** K
    if mat.rows == 0 or mat.cols == 0:
        return []
    if mod < (1 << 31):
        M = np.array(mat.entries, dtype=np.int64) % mod
    else:
        M = np.empty((mat.rows, mat.cols), dtype=object)
        for i, r in enumerate(mat.entries):
            M[i, :] = [x % mod for x in r]
    vals = []
    layer = 0
    mcur = mod
    while M.size and mcur > 1 and np.any(M != 0):
        # clear every pivot coprime to p at this layer
        while True:
            units = np.nonzero(M % p)
            if units[0].size == 0:
                break
            i, j = int(units[0][0]), int(units[1][0])
            inv = pow(int(M[i, j]), -1, mcur)
            row = (M[i, :] * inv) % mcur
            col = M[:, j].copy()
            M = (M - np.outer(col, row)) % mcur
            keep_r = np.arange(M.shape[0]) != i
            keep_c = np.arange(M.shape[1]) != j
            M = M[keep_r][:, keep_c]
            vals.append(layer)
            if M.size == 0:
                break
        if M.size == 0:
            break
        M = M // p  # exact: no unit entries remain
        mcur //= p
        layer += 1
    return vals


# ---------------------------------------------------------------------------
# abelian groups

@dataclass(frozen=True)
class AbGroup:
    """Finitely generated abelian group in invariant factor form.

    invariant_factors is (d_1, ..., d_k) with d_i | d_{i+1}, no d_i = 1,
    and 0 encoding an infinite cyclic factor (zeros come last).
    """

    invariant_factors: tuple[int, ...]

    def __post_init__(self):
        prev = None
        for d in self.invariant_factors:
            if d == 1 or d < 0:
                raise LinalgError(f"bad invariant factor {d}")
            if prev is not None and prev != 0:
                if d != 0 and d % prev:
                    raise LinalgError("invariant factors must form a divisor chain")
            if prev == 0 and d != 0:
                raise LinalgError("free factors must come last")
            prev = d

    @staticmethod
    def from_moduli(moduli: Iterable[int]) -> "AbGroup":
        """Canonicalize an arbitrary list of cyclic orders (0 = free)."""
        mods = [int(m) for m in moduli]
        if any(m < 0 for m in mods):
            raise LinalgError("negative modulus")
        n = len(mods)
        diag = [[mods[i] if i == j else 0 for j in range(n)] for i in range(n)]
        inv = snf_invariants(IntMatrix.from_rows(diag, n), verify=False)
        finite = tuple(d for d in inv if d > 1)
        rank = n - len(inv)
        return AbGroup(finite + (0,) * rank)

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d)

    @property
    def rank(self) -> int:
        return sum(1 for d in self.invariant_factors if d == 0)

    @property
    def is_finite(self) -> bool:
        return self.rank == 0

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    @property
    def order(self):
        """Group order, or None when infinite."""
        if not self.is_finite:
            return None
        return math.prod(self.torsion) if self.torsion else 1

    @property
    def exponent(self) -> int:
        t = self.torsion
        return t[-1] if t else 1

    # element helpers for finite groups (tuples of residues)
    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.invariant_factors)

    def add(self, a, b) -> tuple[int, ...]:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariant_factors))

    def neg(self, a) -> tuple[int, ...]:
        return tuple((-x) % d for x, d in zip(a, self.invariant_factors))

    def scale(self, a, k: int) -> tuple[int, ...]:
        return tuple((x * k) % d for x, d in zip(a, self.invariant_factors))

    def reduce(self, a) -> tuple[int, ...]:
        return tuple(x % d for x, d in zip(a, self.invariant_factors))

    def element_order(self, a) -> int:
        return math.lcm(*(d // math.gcd(d, x) for x, d in zip(a, self.invariant_factors))) if a else 1

    def elements(self) -> list[tuple[int, ...]]:
        if not self.is_finite:
            raise LinalgError("cannot enumerate an infinite group")
        out = [()]
        for d in self.invariant_factors:
            out = [t + (x,) for t in out for x in range(d)]
        return out

    def index_of(self, a) -> int:
        idx = 0
        for x, d in zip(a, self.invariant_factors):
            idx = idx * d + (x % d)
        return idx


@dataclass(frozen=True)
class AbHom:
    """Homomorphism between finite abelian groups in invariant coordinates.

    matrix has one row per domain invariant; the image of x is x @ matrix
    reduced in the codomain.  Construction checks well-definedness:
    d_i * row_i must vanish in the codomain.
    """

    domain: AbGroup
    codomain: AbGroup
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        kd = len(self.domain.invariant_factors)
        kc = len(self.codomain.invariant_factors)
        if len(self.matrix) != kd or any(len(r) != kc for r in self.matrix):
            raise LinalgError("homomorphism matrix has wrong shape")
        for d, row in zip(self.domain.invariant_factors, self.matrix):
            for v, dc in zip(row, self.codomain.invariant_factors):
                if dc == 0:
                    if d != 0 and d * v != 0:
                        raise LinalgError("map not well defined on torsion")
                elif d != 0 and (d * v) % dc:
                    raise LinalgError("map not well defined")

    def apply(self, a) -> tuple[int, ...]:
        kc = len(self.codomain.invariant_factors)
        acc = [0] * kc
        for x, row in zip(a, self.matrix):
            if x:
                for j in range(kc):
                    acc[j] += x * row[j]
        return self.codomain.reduce(tuple(acc))

    def compose(self, other: "AbHom") -> "AbHom":
        """self after other (other maps into self.domain)."""
        rows = [self.apply(row) for row in other.matrix]
        return AbHom(other.domain, self.codomain, tuple(tuple(r) for r in rows))


_FAST_COKERNEL_CELLS = 50_000


def _unit_prereduce(mat: IntMatrix) -> tuple[int, IntMatrix]:
    """Split off Smith pivots of absolute value 1 by exact Schur steps.

    Clearing the row and column of a +-1 entry with integer operations
    removes one invariant factor equal to 1 and leaves the Smith form of
    the complement unchanged.  Coset-indicator and presentation matrices
    are unit-rich, so this collapses most of the matrix before the cubic
    elimination runs.  Returns (unit pivot count, remaining matrix).
    """
    try:
        A = np.array([list(r) for r in mat.entries], dtype=np.int64)
        if A.size and int(np.abs(A).max()) >= 1 << 62:
            raise OverflowError
    except OverflowError:
        A = np.array([list(r) for r in mat.entries], dtype=object)
    if A.size == 0:
        return 0, mat
    ones = 0
    while True:
        unit = np.abs(A) == 1
        if not unit.any():
            break
        nz = A != 0
        rn = nz.sum(axis=1)
        cn = nz.sum(axis=0)
        pos = np.argwhere(unit)
        score = (rn[pos[:, 0]] - 1) * (cn[pos[:, 1]] - 1)
        progressed = False
        for k in np.argsort(score, kind="stable"):
            i, j = int(pos[k, 0]), int(pos[k, 1])
            v = A[i, j]
            if v != 1 and v != -1:
                continue  # stale candidate, changed by an earlier pivot
            if A.dtype == np.int64:
                colsel = A[:, j]
                nzr = np.nonzero(colsel)[0]
                grow = int(np.abs(A[nzr, :]).max(initial=0)) + (
                    int(np.abs(colsel[nzr]).max(initial=0))
                    * int(np.abs(A[i, :]).max(initial=0)))
                if grow >= 1 << 62:
                    A = A.astype(object)
            row = A[i, :] * int(v)
            col = A[:, j].copy()
            nzr = np.nonzero(col)[0]
            A[nzr, :] -= np.outer(col[nzr], row)
            ones += 1
            progressed = True
        if not progressed:
            break
    keep_r = np.nonzero((A != 0).any(axis=1))[0]
    keep_c = np.nonzero((A != 0).any(axis=0))[0]
    rows = [[int(A[i, j]) for j in keep_c] for i in keep_r]
    return ones, IntMatrix.from_rows(rows, len(keep_c))


def cokernel(A, ambient_rank: int) -> AbGroup:
    """Structure of Z^ambient_rank / rowspace(A)."""
    mat = A if isinstance(A, IntMatrix) else IntMatrix.from_rows(A, ambient_rank)
    if mat.cols != ambient_rank:
        raise LinalgError("ambient rank does not match matrix width")
    if mat.rows * mat.cols >= _FAST_COKERNEL_CELLS:
        ones, rest = _unit_prereduce(mat)
        inv = [1] * ones + snf_invariants(rest)
    else:
        inv = snf_invariants(mat)
    finite = tuple(d for d in inv if d > 1)
    rank = ambient_rank - len(inv)
    return AbGroup(finite + (0,) * rank)


# ---------------------------------------------------------------------------
# kernels and subquotients

def _clear_denominators(rows) -> tuple[list[list[int]], int]:
    out = []
    width = None
    for r in rows:
        width = len(r) if width is None else width
        den = 1
        for x in r:
            if isinstance(x, Fraction):
                den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) if isinstance(x, Fraction) else int(x) * den for x in r])
    return out, (width or 0)


def rational_kernel(A) -> list[tuple[int, ...]]:
    """Saturated basis of {v integer : A v = 0}.

    A may have Fraction entries (rows are cleared first; the kernel does
    not change).  The result is the full integer kernel lattice of the
    rational kernel space, in canonical echelon form.
    """
    if isinstance(A, IntMatrix):
        rows = [list(r) for r in A.entries]
        cols = A.cols
    else:
        rows, cols = _clear_denominators(A)
    rows = [r for r in rows if any(r)]
    nr = len(rows)
    if cols == 0:
        return []
    # augmented transpose trick: echelon [A^T | I]; rows whose A^T block
    # dies give exactly the kernel lattice in the right block.
    aug = []
    for j in range(cols):
        a = np.empty(nr + cols, dtype=object)
        a[:nr] = [rows[i][j] for i in range(nr)]
        a[nr:] = [1 if k == j else 0 for k in range(cols)]
        aug.append(a)
    pivots, rest = _echelon(aug, 0, nr, gcd_rows=True)
    kern = [r for r in rest]
    kpiv, kz = _echelon(kern, nr, nr + cols)
    assert not any(any(x != 0 for x in r.tolist()) for r in kz)
    _reduce_above(kpiv)
    return [tuple(int(x) for x in r[nr:]) for _, r in kpiv]


def subquotient_torsion(kernel_basis, sub_rows) -> AbGroup:
    """Structure of rowspace(kernel_basis) / rowspace(sub_rows).

    Raises NotSubLattice when some sub row is outside the span of the
    kernel basis.  Free rank, if any, is reported through zero invariant
    factors.
    """
    krows, cols = _rows_of(kernel_basis)
    pivots, kz = _echelon(krows, 0, cols)
    if any(any(x != 0 for x in r.tolist()) for r in kz):
        raise LinalgError("kernel basis rows are dependent")
    _reduce_above(pivots)
    srows, scols = _rows_of(sub_rows)
    if srows and scols != cols:
        raise NotSubLattice("ambient dimensions differ")
    coords = []
    for r in srows:
        c = _back_substitute(pivots, r)
        if c is None:
            raise NotSubLattice("row outside the big lattice")
        coords.append(c)
    rank_k = len(pivots)
    return cokernel(IntMatrix.from_rows(coords, rank_k), rank_k)


# primes below 2^31, so F_p products stay inside int64
_RANK_PRIMES = (2147483647, 2147483629, 2147483587)


def modular_rank(A, p: int = _RANK_PRIMES[0]) -> int:
    """Rank of A over the prime field F_p.

    Always a lower bound for the rank over Q; when the result reaches
    min(rows, cols) the rational rank is certified equal, which is how
    the large kernel computations use it.
    """
    mat = A if isinstance(A, IntMatrix) else IntMatrix.from_rows(A)
    if mat.rows == 0 or mat.cols == 0:
        return 0
    if p >= 1 << 31 or p < 2:
        raise LinalgError("modulus out of the safe int64 range")
    M = np.array([[x % p for x in row] for row in mat.entries],
                 dtype=np.int64)
    rows, cols = M.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(M[rank:, col])[0]
        if nz.size == 0:
            continue
        i = rank + int(nz[0])
        if i != rank:
            M[[rank, i]] = M[[i, rank]]
        inv = pow(int(M[rank, col]), p - 2, p)
        M[rank, col:] = (M[rank, col:] * inv) % p
        below = np.nonzero(M[rank + 1:, col])[0]
        if below.size:
            idx = rank + 1 + below
            M[idx, col:] = (M[idx, col:]
                            - np.outer(M[idx, col], M[rank, col:])) % p
        rank += 1
    return rank


def row_saturation(A) -> list[tuple[int, ...]]:
    """Canonical basis of the saturation of the row lattice of A.

    The saturation is span_Q(rows) intersected with the integer ambient.
    With L A R = diag(d) the row space of A equals that of diag(d) R^-1,
    so the saturation is spanned by the first rank rows of R^-1; these
    are collected by accumulating the inverses of the column operations
    of a Smith elimination, then put in canonical echelon form.
    """
    mat = A if isinstance(A, IntMatrix) else IntMatrix.from_rows(A)
    n, c = mat.rows, mat.cols
    if n == 0 or c == 0:
        return []
    M = _obj_matrix(mat)
    rinv = _obj_matrix(IntMatrix.identity(c))

    def on_col(kind, i, j, q):
        # M <- M C accumulates R; the inverse op acts on R^-1 rows
        if kind == "sub":
            rinv[j, :] += q * rinv[i, :]
        else:
            rinv[[i, j], :] = rinv[[j, i], :]

    diag = _snf_core(M, n, c, None, on_col)
    rank = sum(1 for d in diag if d)
    return hnf_basis([tuple(int(x) for x in rinv[k]) for k in range(rank)])


# ---------------------------------------------------------------------------
# black-box abelian structure

def ab_discover(order: int, mul: Callable, gens: Sequence, identity=None):
    """Structure and discrete logarithm of a finite abelian black box.

    order is the known group order, mul the product map, gens a
    generating list of hashable elements.  Returns (AbGroup, dlog) where
    dlog maps every element to its tuple of coordinates in the invariant
    factor decomposition.  Raises GeneratorsInsufficient when the
    closure of gens has fewer than order elements.  The identity is
    located by cycling the first generator when not supplied.
    """
    if identity is None:
        if not gens:
            raise LinalgError("cannot locate identity without generators")
        g = gens[0]
        seen = {g}
        prev, cur = g, mul(g, g)
        while cur != g:
            if cur in seen:
                raise LinalgError("generator powers do not cycle back; "
                                  "element labels are not canonical")
            seen.add(cur)
            prev, cur = cur, mul(cur, g)
        identity = prev
    k = len(gens)
    words = {identity: (0,) * k}
    frontier = [identity]
    while frontier:
        nxt = []
        for e in frontier:
            w = words[e]
            for i, g in enumerate(gens):
                f = mul(e, g)
                if f not in words:
                    words[f] = tuple(w[j] + (1 if j == i else 0) for j in range(k))
                    nxt.append(f)
        frontier = nxt
    if len(words) < order:
        raise GeneratorsInsufficient(
            f"generators span {len(words)} of {order} elements")
    if len(words) > order:
        raise LinalgError("closure exceeds declared order")
    if k == 0:
        return AbGroup(()), {identity: ()}
    rel = set()
    for e, w in words.items():
        for i, g in enumerate(gens):
            f = mul(e, g)
            wf = words[f]
            row = tuple(w[j] + (1 if j == i else 0) - wf[j] for j in range(k))
            if any(row):
                rel.add(row)
    rel = sorted(rel)
    diag, _, R = snf(IntMatrix.from_rows(rel, k) if rel else IntMatrix.zeros(0, k))
    if len(diag) != k or any(d == 0 for d in diag):
        raise LinalgError("black-box group is not finite as presented")
    kept = [i for i, d in enumerate(diag) if d > 1]
    group = AbGroup(tuple(diag[i] for i in kept))
    if (group.order or 1) != order:
        raise LinalgError("relation lattice volume does not match order")
    Rm = R.entries
    dlog = {}
    for e, w in words.items():
        full = [sum(w[i] * Rm[i][j] for i in range(k)) for j in range(k)]
        dlog[e] = tuple(full[i] % diag[i] for i in kept)
    return group, dlog
