"""Dense GF(2) linear algebra on bit-packed matrices.

Rows are stored as Python integers, bit j of a row being column j. All
arithmetic is XOR/AND, so row operations are single integer ops and the
module has no dependency beyond the standard library.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SingularMatrix(Exception):
    """Raised when a unique solution is requested for a singular system."""


def _parity(x: int) -> int:
    return x.bit_count() & 1


@dataclass
class BitVector:
    """Length-n vector over GF(2), packed into one integer (bit i = entry i)."""

    length: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.length < 0 or self.bits >> self.length:
            raise ValueError("bits do not fit declared length")

    @classmethod
    def from_list(cls, entries: list[int]) -> BitVector:
        bits = 0
        for i, e in enumerate(entries):
            if e & 1:
                bits |= 1 << i
        return cls(len(entries), bits)

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.length)]

    def get(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def is_zero(self) -> bool:
        return self.bits == 0

    def __xor__(self, other: BitVector) -> BitVector:
        if self.length != other.length:
            raise ValueError("length mismatch")
        return BitVector(self.length, self.bits ^ other.bits)

    def dot(self, other: BitVector) -> int:
        """Inner product over GF(2)."""
        if self.length != other.length:
            raise ValueError("length mismatch")
        return _parity(self.bits & other.bits)


@dataclass
class BitMatrix:
    """rows x cols matrix over GF(2) with bit-packed rows.

    ``row_bits[i]`` holds row i, bit j of it being a[i, j]. The packing is
    row-major with bit 0 = column 0 so that a matrix maps directly onto the
    simulator's basis-state encoding (qubit i*cols + j holds a[i, j]).
    """

    rows: int
    cols: int
    row_bits: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimension")
        if not self.row_bits:
            self.row_bits = [0] * self.rows
        if len(self.row_bits) != self.rows:
            raise ValueError("row count mismatch")
        mask = (1 << self.cols) - 1
        if any(r & ~mask for r in self.row_bits):
            raise ValueError("row bits exceed declared width")

    @classmethod
    def from_rows(cls, rows: list[list[int]]) -> BitMatrix:
        if not rows:
            return cls(0, 0, [])
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        packed = []
        for r in rows:
            bits = 0
            for j, e in enumerate(r):
                if e & 1:
                    bits |= 1 << j
            packed.append(bits)
        return cls(len(rows), cols, packed)

    def to_rows(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.cols)] for r in self.row_bits]

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError((i, j))
        return (self.row_bits[i] >> j) & 1

    def set(self, i: int, j: int, value: int) -> None:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError((i, j))
        if value & 1:
            self.row_bits[i] |= 1 << j
        else:
            self.row_bits[i] &= ~(1 << j)

    def copy(self) -> BitMatrix:
        return BitMatrix(self.rows, self.cols, list(self.row_bits))

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.row_bits[i])

    def mul_vec(self, x: BitVector) -> BitVector:
        """Matrix-vector product A @ x over GF(2)."""
        if x.length != self.cols:
            raise ValueError("dimension mismatch")
        bits = 0
        for i, r in enumerate(self.row_bits):
            if _parity(r & x.bits):
                bits |= 1 << i
        return BitVector(self.rows, bits)

    def is_identity(self) -> bool:
        return self.rows == self.cols and all(
            self.row_bits[i] == 1 << i for i in range(self.rows)
        )


@dataclass
class Rref:
    """Reduced row echelon form together with its pivot columns and rank."""

    matrix: BitMatrix
    pivot_cols: list[int]

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)


# ---------------------------------------------------------------------------
# Echelon forms


def row_echelon(a: BitMatrix) -> BitMatrix:
    """Row echelon form by downward pivot search with row swaps.

    Leading columns of the nonzero rows are strictly increasing and zero
    rows sit at the bottom, so the result satisfies the usual echelon
    predicate for every input.
    """
    m = a.copy()
    pivot_row = 0
    for col in range(m.cols):
        src = next(
            (r for r in range(pivot_row, m.rows) if m.get(r, col)), None
        )
        if src is None:
            continue
        if src != pivot_row:
            m.row_bits[pivot_row], m.row_bits[src] = (
                m.row_bits[src],
                m.row_bits[pivot_row],
            )
        for r in range(pivot_row + 1, m.rows):
            if m.get(r, col):
                m.row_bits[r] ^= m.row_bits[pivot_row]
        pivot_row += 1
        if pivot_row == m.rows:
            break
    return m


def row_echelon_xor_trace(a: BitMatrix) -> BitMatrix:
    """Echelon variant that mirrors the reversible circuit's pivot rule.

    Instead of swapping, the pivot step repeatedly XORs lower rows into the
    pivot row while the diagonal entry is still zero, then eliminates below.
    The result is row equivalent to the input and upper triangular whenever
    the leading square block is invertible, but rank-deficient inputs can
    leave a non-echelon matrix; this matches the circuit bit for bit, which
    is the point of the function.
    """
    m = a.copy()
    for j in range(min(m.cols, m.rows)):
        for i in range(j + 1, m.rows):
            if not m.get(j, j):
                m.row_bits[j] ^= m.row_bits[i]
        for k in range(j + 1, m.rows):
            if m.get(k, j):
                m.row_bits[k] ^= m.row_bits[j]
    return m


def rref(a: BitMatrix) -> Rref:
    """Reduced row echelon form (canonical: unique per row space).

    Returns:
        Rref with the reduced matrix and the list of pivot columns.
    """
    m = a.copy()
    pivots: list[int] = []
    pivot_row = 0
    for col in range(m.cols):
        src = next(
            (r for r in range(pivot_row, m.rows) if m.get(r, col)), None
        )
        if src is None:
            continue
        if src != pivot_row:
            m.row_bits[pivot_row], m.row_bits[src] = (
                m.row_bits[src],
                m.row_bits[pivot_row],
            )
        for r in range(m.rows):
            if r != pivot_row and m.get(r, col):
                m.row_bits[r] ^= m.row_bits[pivot_row]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == m.rows:
            break
    return Rref(m, pivots)


def rank(a: BitMatrix) -> int:
    return rref(a).rank


def is_row_echelon(a: BitMatrix) -> bool:
    """Predicate: leading columns strictly increase, zero rows at bottom."""
    last = -1
    seen_zero = False
    for bits in a.row_bits:
        if bits == 0:
            seen_zero = True
            continue
        if seen_zero:
            return False
        lead = (bits & -bits).bit_length() - 1
        if lead <= last:
            return False
        last = lead
    return True


def is_rref(a: BitMatrix) -> bool:
    """Predicate: echelon, and every pivot column is a unit column."""
    if not is_row_echelon(a):
        return False
    for i, bits in enumerate(a.row_bits):
        if bits == 0:
            continue
        lead = (bits & -bits).bit_length() - 1
        for r in range(a.rows):
            if a.get(r, lead) != (1 if r == i else 0):
                return False
    return True


def row_space(a: BitMatrix) -> set[int]:
    """All XOR combinations of the rows, as packed integers."""
    span = {0}
    for bits in a.row_bits:
        span |= {v ^ bits for v in span}
    return span


# ---------------------------------------------------------------------------
# Solving


def gaussian_eliminate(a: BitMatrix, b: BitVector) -> BitVector:
    """Solve A x = b for square invertible A.

    Forward elimination uses the same XOR pivot rule as the reversible
    circuit (accumulate lower rows into the pivot row while the diagonal
    is zero), then back substitution runs on the augmented column.

    Raises:
        SingularMatrix: if A is not invertible.
    """
    if a.rows != a.cols:
        raise SingularMatrix("matrix is not square")
    if b.length != a.rows:
        raise ValueError("dimension mismatch")
    n = a.rows
    m = a.copy()
    rhs = list(b.to_list())
    for j in range(n):
        for i in range(j + 1, n):
            if not m.get(j, j):
                m.row_bits[j] ^= m.row_bits[i]
                rhs[j] ^= rhs[i]
        if not m.get(j, j):
            raise SingularMatrix("rank deficient")
        for k in range(j + 1, n):
            if m.get(k, j):
                m.row_bits[k] ^= m.row_bits[j]
                rhs[k] ^= rhs[j]
    for j in range(n - 1, 0, -1):
        for i in range(j - 1, -1, -1):
            if m.get(i, j):
                rhs[i] ^= rhs[j]
    return BitVector.from_list(rhs)


def nullspace_basis(a: BitMatrix) -> list[BitVector]:
    """Basis of {x : A x = 0} from the free-column pattern of the RREF.

    Each free column f yields one basis vector: entry f is 1, entry p is
    R[i, f] for every pivot column p (owned by row i), all else 0.
    """
    r = rref(a)
    pivots = r.pivot_cols
    free_cols = [j for j in range(a.cols) if j not in pivots]
    basis = []
    for f in free_cols:
        bits = 1 << f
        for i, p in enumerate(pivots):
            if r.matrix.get(i, f):
                bits |= 1 << p
        basis.append(BitVector(a.cols, bits))
    return basis


def general_solution(
    a: BitMatrix, b: BitVector
) -> tuple[BitVector, list[BitVector]] | None:
    """Particular solution plus nullspace basis, or None if inconsistent.

    The system is inconsistent exactly when the augmented matrix has
    higher rank than A; None is the no-solution signal, not an error.
    """
    if b.length != a.rows:
        raise ValueError("dimension mismatch")
    aug = BitMatrix(
        a.rows,
        a.cols + 1,
        [a.row_bits[i] | (b.get(i) << a.cols) for i in range(a.rows)],
    )
    r_aug = rref(aug)
    if a.cols in r_aug.pivot_cols:
        return None
    x_bits = 0
    for i, p in enumerate(r_aug.pivot_cols):
        if r_aug.matrix.get(i, a.cols):
            x_bits |= 1 << p
    return BitVector(a.cols, x_bits), nullspace_basis(a)


# ---------------------------------------------------------------------------
# Text format


def dump_matrix(a: BitMatrix) -> str:
    """Serialize as a dimension header line followed by 0/1 row strings."""
    lines = [f"{a.rows} {a.cols}"]
    for bits in a.row_bits:
        lines.append("".join(str((bits >> j) & 1) for j in range(a.cols)))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> BitMatrix:
    """Inverse of dump_matrix. Raises ValueError on malformed input."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("header must be 'rows cols'")
    rows, cols = int(head[0]), int(head[1])
    if len(lines) - 1 != rows:
        raise ValueError("row count does not match header")
    packed = []
    for ln in lines[1:]:
        ln = ln.strip()
        if len(ln) != cols or set(ln) - {"0", "1"}:
            raise ValueError(f"bad row {ln!r}")
        packed.append(int(ln[::-1], 2) if ln else 0)
    return BitMatrix(rows, cols, packed)
