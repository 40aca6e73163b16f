"""Dense complex matrix kernel: Haar sampling, permutations, fidelity and I/O.

Unitaries are plain ``numpy.ndarray`` values of dtype complex128; the helpers in
:mod:`qumode_compiler.validation` enforce the unitarity contract at the
boundaries.

Haar sampling draws from ``numpy.random.Generator(PCG64(seed))`` so that a given
``(n, seed)`` pair always produces the same matrix.
"""

import json
from dataclasses import dataclass

import numpy as np

from .validation import (
    check_matrix,
    check_permutation,
    check_positive_int,
    check_same_shape,
    check_unitary,
)


def haar_random_unitary(n, seed):
    """Sample an ``n x n`` Haar-random unitary.

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` pushed into
    ``Q`` so that the result is Haar distributed (Mezzadri's construction).
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"invalid dimension {n!r}: need an integer n >= 2")
    rng = np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def fidelity(u_app, u):
    """``|tr(u_app @ u^dag)| / N``.

    The modulus makes the metric blind to a global phase.
    """
    a = check_matrix(u_app, "u_app")
    b = check_matrix(u, "u")
    check_same_shape(a, b)
    if a.shape[0] != a.shape[1]:
        raise ValueError("fidelity needs square matrices")
    # tr(A B^dag) = sum_ij A_ij conj(B_ij); not vdot, which flattens in memory order
    return float(abs(np.sum(a * b.conj())) / a.shape[0])


@dataclass(frozen=True)
class PermutationPair:
    """Row and column relabelling of a unitary.

    ``row_perm[i]`` is the original row shown at row ``i`` (the output of
    physical qumode ``i`` is the logical output ``row_perm[i]``).
    ``col_perm[j]`` is the position that original column ``j`` moves to
    (logical input ``j`` is prepared on physical qumode ``col_perm[j]``).
    Together: ``U_per[i, col_perm[j]] == U[row_perm[i], j]``.
    """

    row_perm: np.ndarray
    col_perm: np.ndarray

    def __post_init__(self):
        r = check_permutation(self.row_perm, name="row_perm")
        c = check_permutation(self.col_perm, len(r), name="col_perm")
        object.__setattr__(self, "row_perm", r)
        object.__setattr__(self, "col_perm", c)

    @property
    def dim(self):
        return len(self.row_perm)

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n), np.arange(n))

    def inverse(self):
        return PermutationPair(np.argsort(self.row_perm), np.argsort(self.col_perm))

    def row_matrix(self):
        """``P_r`` with ``P_r @ U`` equal to ``U[row_perm]``."""
        p = np.zeros((self.dim, self.dim))
        p[np.arange(self.dim), self.row_perm] = 1.0
        return p

    def col_matrix(self):
        """``P_c`` with ``(U @ P_c)[:, col_perm[j]] == U[:, j]``."""
        p = np.zeros((self.dim, self.dim))
        p[np.arange(self.dim), self.col_perm] = 1.0
        return p

    def __eq__(self, other):
        if not isinstance(other, PermutationPair):
            return NotImplemented
        return np.array_equal(self.row_perm, other.row_perm) and np.array_equal(
            self.col_perm, other.col_perm
        )

    __hash__ = None


def apply_permutations(u, p):
    """Return ``P_r @ u @ P_c`` as pure index moves (bit-exact)."""
    arr = np.asarray(u)
    if arr.ndim != 2 or arr.shape != (p.dim, p.dim):
        raise ValueError(f"dimension mismatch: matrix {arr.shape} vs permutation size {p.dim}")
    return arr[p.row_perm][:, np.argsort(p.col_perm)]


def matmul(a, b):
    a = check_matrix(a, "a")
    b = check_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch for product: {a.shape} @ {b.shape}")
    return a @ b


def unitary_to_dict(u):
    u = np.asarray(u)
    return {"n": int(u.shape[0]), "re": u.real.tolist(), "im": u.imag.tolist()}


def unitary_from_dict(data, atol=None):
    """Parse ``{"n", "re", "im"}`` and reject anything that is not unitary."""
    try:
        n = data["n"]
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed unitary record: {exc}") from exc
    check_positive_int(n, "n")
    if re.shape != (n, n) or im.shape != (n, n):
        raise ValueError(f"unitary record declares n={n} but re/im have shapes {re.shape}, {im.shape}")
    kwargs = {} if atol is None else {"atol": atol}
    return check_unitary(re + 1j * im, **kwargs)


def write_unitary(path, u):
    with open(path, "w") as fh:
        json.dump(unitary_to_dict(u), fh)
        fh.write("\n")


def read_unitary(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return unitary_from_dict(data)
