"""Elimination engine: plan, decompose and reconstruct MZI meshes.

``T_{m,n}(theta, phi)`` acts on qumodes ``m`` and ``n`` as::

    [[e^{i phi} cos(theta), -sin(theta)],
     [e^{i phi} sin(theta),  cos(theta)]]

One elimination step right-multiplies the working matrix by ``T^dag`` so that
column ``m`` of the target row becomes zero and its amplitude is accumulated
into column ``n``. When every row is done the working matrix is the diagonal
``Lambda`` and ``U = Lambda @ T_k @ ... @ T_1``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .topology import PatternTree
from .validation import check_unitary

CIRCUIT_ORDER = (
    "Gates are listed first-applied-first. Applying block A and then block B "
    "gives B @ A on the annihilation-operator vector, so blocks T_1..T_k "
    "followed by the terminal phases Lambda realise U = Lambda @ T_k @ ... @ T_1."
)

RESIDUAL_TOL = 1e-6


def circuit_order_convention():
    return CIRCUIT_ORDER


class DecompositionError(RuntimeError):
    """The elimination did not end on a diagonal unit-modulus matrix."""


class MziBlock(NamedTuple):
    m: int
    n: int
    theta: float
    phi: float
    dropped: bool = False


@njit(cache=True)
def _solve(u_m, u_n):
    a_m = abs(u_m)
    if a_m == 0.0:
        return 0.0, 0.0
    a_n = abs(u_n)
    theta = np.arctan2(a_m, a_n)
    if a_n == 0.0:
        return theta, 0.0
    phi = np.angle(u_m * np.conj(u_n))
    if phi <= -np.pi:
        phi += 2.0 * np.pi
    return theta, phi


def solve_elimination(u_m, u_n):
    """Angles ``(theta, phi)`` that zero ``u_m`` against ``u_n``.

    ``theta`` lies in ``[0, pi/2]`` with ``tan(theta) = |u_m| / |u_n|`` and
    ``phi = arg(u_m) - arg(u_n)`` wrapped to ``(-pi, pi]``.
    """
    theta, phi = _solve(complex(u_m), complex(u_n))
    return float(theta), float(phi)


def apply_elimination(w, row, m, n):
    """One elimination step done densely: ``w @ T_{m,n}(theta, phi)^dag``.

    Zeroes ``w[row, m]`` into ``w[row, n]``. Returns ``(w_new, theta, phi)``.
    Slow; meant as a reference for the compiled kernel.
    """
    w = np.asarray(w, dtype=np.complex128)
    theta, phi = solve_elimination(w[row, m], w[row, n])
    return w @ mzi_unitary(w.shape[1], m, n, theta, phi).conj().T, theta, phi


@njit(cache=True)
def _eliminate_all(wt, steps, thetas, phis):
    # wt is the transposed working matrix: wt[k] is column k
    n_rows = wt.shape[1]
    for s in range(steps.shape[0]):
        r = steps[s, 0]
        m = steps[s, 1]
        n = steps[s, 2]
        theta, phi = _solve(wt[m, r], wt[n, r])
        thetas[s] = theta
        phis[s] = phi
        c = np.cos(theta)
        sn = np.sin(theta)
        ep = np.exp(-1j * phi)
        for i in range(n_rows):
            xm = wt[m, i]
            xn = wt[n, i]
            wt[m, i] = xm * ep * c - xn * sn
            wt[n, i] = xm * ep * sn + xn * c


@njit(cache=True)
def _apply_blocks(out, ms, ns, thetas, phis, keep):
    dim = out.shape[1]
    for b in range(ms.shape[0]):
        m = ms[b]
        n = ns[b]
        ep = np.exp(1j * phis[b])
        if keep[b]:
            c = np.cos(thetas[b])
            s = np.sin(thetas[b])
            for j in range(dim):
                xm = out[m, j]
                xn = out[n, j]
                out[m, j] = ep * c * xm - s * xn
                out[n, j] = ep * s * xm + c * xn
        else:
            for j in range(dim):
                out[m, j] = ep * out[m, j]


@dataclass(frozen=True)
class EliminationPlan:
    """Ordered ``(target_row, m, n)`` steps; indices are 0-based qumodes."""

    steps: np.ndarray
    n_qumodes: int
    tree: PatternTree = None

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class Decomposition:
    ms: np.ndarray
    ns: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray
    final_phases: np.ndarray
    source_dim: int

    def __len__(self):
        return len(self.thetas)

    @property
    def blocks(self):
        return [
            MziBlock(int(m), int(n), float(t), float(p))
            for m, n, t, p in zip(self.ms, self.ns, self.thetas, self.phis)
        ]

    @property
    def lam(self):
        return np.exp(1j * self.final_phases)


def build_plan(tree, child_order="trunk-first"):
    """Schedule every row elimination over a BFS-labeled pattern tree.

    Rows run from the last to the second. For row ``r`` the tree restricted to
    labels ``1..r`` is re-rooted at node ``r`` (always a leaf there) and the
    eliminations are emitted in post-order, so each node is eliminated into its
    parent only after all of its own children have been absorbed.

    ``child_order`` decides the order among siblings: ``"trunk-first"`` absorbs
    the largest subtree first so that short branches meet an already
    accumulated amplitude; ``"branches-first"`` does the opposite.
    """
    if child_order not in ("trunk-first", "branches-first"):
        raise ValueError(f"unknown child_order {child_order!r}")
    if not tree.labeled:
        raise ValueError("build_plan needs a BFS-labeled tree")
    n = tree.n_nodes
    nbrs = tree.neighbors()
    for r in range(1, n):
        if not any(w < r for w in nbrs[r]):
            raise ValueError(f"labels 1..{r + 1} do not induce a connected subtree")
    sign = -1 if child_order == "trunk-first" else 1

    steps = []
    for r in range(n - 1, 0, -1):
        # hang the active subtree {0..r} from r
        par = {r: -1}
        order = [r]
        i = 0
        while i < len(order):
            v = order[i]
            i += 1
            for w in nbrs[v]:
                if w <= r and w not in par:
                    par[w] = v
                    order.append(w)
        size = dict.fromkeys(order, 1)
        kids = {v: [] for v in order}
        for v in reversed(order[1:]):
            size[par[v]] += size[v]
            kids[par[v]].append(v)
        for v in kids:
            kids[v].sort(key=lambda w: (sign * size[w], w))
        # iterative post-order
        stack = [(r, 0)]
        while stack:
            v, k = stack.pop()
            if k < len(kids[v]):
                stack.append((v, k + 1))
                stack.append((kids[v][k], 0))
            elif v != r:
                steps.append((r, v, par[v]))
    arr = np.array(steps, dtype=np.int64).reshape(-1, 3)
    return EliminationPlan(arr, n, tree)


def decompose(u, plan):
    """Run ``plan`` on ``u`` and return its MZI decomposition."""
    u = check_unitary(u)
    n = u.shape[0]
    if n != plan.n_qumodes:
        raise ValueError(f"plan is for {plan.n_qumodes} qumodes, unitary has dimension {n}")
    k = len(plan.steps)
    wt = np.ascontiguousarray(u.T)
    thetas = np.zeros(k)
    phis = np.zeros(k)
    if k:
        _eliminate_all(wt, plan.steps, thetas, phis)
    diag = np.diagonal(wt).copy()
    off = wt - np.diag(diag)
    residual = float(np.max(np.abs(off))) if n > 1 else 0.0
    if residual > RESIDUAL_TOL or np.max(np.abs(np.abs(diag) - 1.0)) > RESIDUAL_TOL:
        raise DecompositionError(
            f"elimination left off-diagonal mass {residual:.3e}; plan does not cover the matrix"
        )
    return Decomposition(
        ms=plan.steps[:, 1].copy(),
        ns=plan.steps[:, 2].copy(),
        thetas=thetas,
        phis=phis,
        final_phases=np.angle(diag),
        source_dim=n,
    )


def reconstruct(d, keep=None):
    """``Lambda @ T_k @ ... @ T_1`` with dropped blocks reduced to ``T(0, phi)``.

    A dropped block keeps its phase shifter; only the beamsplitter goes.
    """
    k = len(d)
    if keep is None:
        keep = np.ones(k, dtype=bool)
    keep = np.asarray(keep, dtype=bool)
    if keep.shape != (k,):
        raise ValueError(f"keep mask has shape {keep.shape}, expected ({k},)")
    out = np.eye(d.source_dim, dtype=np.complex128)
    if k:
        _apply_blocks(out, d.ms, d.ns, d.thetas, d.phis, keep)
    return d.lam[:, None] * out


def reconstruction_fidelity(d, u, keep=None):
    """Fidelity of the (possibly thinned) decomposition against ``u``."""
    u_app = reconstruct(d, keep)
    return float(abs(np.sum(u_app * np.conj(u))) / d.source_dim)


def mzi_unitary(dim, m, n, theta, phi):
    """Dense ``T_{m,n}(theta, phi)`` embedded in ``dim`` modes."""
    t = np.eye(dim, dtype=np.complex128)
    ep = np.exp(1j * phi)
    t[m, m] = ep * np.cos(theta)
    t[m, n] = -np.sin(theta)
    t[n, m] = ep * np.sin(theta)
    t[n, n] = np.cos(theta)
    return t
