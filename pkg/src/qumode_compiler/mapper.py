"""Zero-cost logical-to-physical qumode mapping.

Column and row permutations of the unitary only relabel where inputs are
prepared and where outputs are read, so they cost no gates. The mapper looks
for permutations that put large amplitudes on the main path of the pattern:

* columns are split into regions: region 0 holds the main-path qumodes, each
  later region the branch qumodes hanging off one main-path node;
* a greedy pass swaps columns into a region whenever the swap raises the
  ``map_k``-th largest row weight over that region;
* rows are then sorted by their main-path weight, largest at the bottom, since
  the bottom row is eliminated first.
"""

from dataclasses import dataclass

import numpy as np

from .decomposer import decompose
from .numerics import PermutationPair, apply_permutations
from .validation import check_int_list

SMALL_ANGLE = 0.1


@dataclass(frozen=True)
class RegionPartition:
    regions: tuple

    @property
    def main(self):
        return self.regions[0]

    @property
    def sizes(self):
        return [len(r) for r in self.regions]


@dataclass(frozen=True)
class MappingResult:
    permutations: PermutationPair
    permuted_unitary: np.ndarray
    map_k: int
    indicator_value: float
    small_angle_count: int = -1
    decomposition: object = None
    candidate_counts: dict = None


def partition_columns(tree):
    """Region 0: main path from the start. Then one region per main node's branches."""
    is_main = tree.is_main()
    owner = {}
    for v in range(tree.n_nodes):
        if is_main[v]:
            continue
        u = v
        while not is_main[u]:
            u = tree.parent[u]
        owner.setdefault(u, []).append(v)
    regions = [np.array(tree.main_path, dtype=np.int64)]
    for v in tree.main_path:
        if v in owner:
            regions.append(np.array(sorted(owner[v]), dtype=np.int64))
    return RegionPartition(tuple(regions))


def row_region_weights(u, region):
    """Per-row sum of ``|U[j, c]|^2`` over the columns in ``region``."""
    region = np.asarray(region, dtype=np.int64)
    if region.size == 0:
        raise ValueError("region must not be empty")
    return np.sum(np.abs(np.asarray(u)[:, region]) ** 2, axis=1)


def _kth_largest(values, k):
    n = len(values)
    return float(np.partition(values, n - k)[n - k])


def indicator(u, region, map_k):
    return _kth_largest(row_region_weights(u, region), map_k)


def greedy_column_exchange(u, partition, map_k):
    """Greedy region-by-region column swaps.

    For each region in turn, every column of every later region is offered to
    every column slot of the current region; a swap is kept when it strictly
    raises the ``map_k``-th largest row weight over the current region.

    Returns ``(permuted, col_perm)`` where ``col_perm[j]`` is the slot that
    original column ``j`` ends up in.
    """
    u = np.asarray(u)
    n = u.shape[0]
    if not 1 <= map_k <= n:
        raise ValueError(f"map_k must lie in [1, {n}], got {map_k}")
    w = np.abs(u) ** 2
    at = np.arange(n)  # at[slot] = original column currently in that slot
    regions = partition.regions
    for i, region in enumerate(regions[:-1]):
        later = np.concatenate(regions[i + 1:])
        alpha = w[:, at[region]].sum(axis=1)
        best = _kth_largest(alpha, map_k)
        for j in later:
            for k in region:
                trial = alpha - w[:, at[k]] + w[:, at[j]]
                score = _kth_largest(trial, map_k)
                if score > best:
                    at[k], at[j] = at[j], at[k]
                    alpha, best = trial, score
    col_perm = np.argsort(at)
    return u[:, at], col_perm


def row_reorder(u, region0):
    """Stable sort of rows by main-path weight, ascending top to bottom.

    Returns ``(permuted, row_perm)`` with ``permuted[i] == u[row_perm[i]]``.
    """
    u = np.asarray(u)
    alpha = row_region_weights(u, region0)
    order = np.argsort(alpha, kind="stable")
    return u[order], order


def _sort_main_slots(u, region0, map_k):
    # strongest columns (over the map_k heaviest rows) go nearest the start
    alpha = row_region_weights(u, region0)
    rows = np.argsort(alpha, kind="stable")[-map_k:]
    weight = np.sum(np.abs(u[np.ix_(rows, region0)]) ** 2, axis=0)
    order = np.argsort(-weight, kind="stable")
    at = np.arange(u.shape[1])
    at[region0] = np.asarray(region0)[order]
    return at


def map_unitary(u, partition, map_k, sort_main_path=False):
    """Greedy exchange plus row reordering for one ``map_k``."""
    u = np.asarray(u)
    _, col_perm = greedy_column_exchange(u, partition, map_k)
    at = np.argsort(col_perm)
    region0 = partition.main
    u_cols = u[:, at]
    _, row_perm = row_reorder(u_cols, region0)
    if sort_main_path:
        slot_src = _sort_main_slots(u_cols[row_perm], region0, map_k)
        at = at[slot_src]
        col_perm = np.argsort(at)
    perms = PermutationPair(row_perm, col_perm)
    u_per = apply_permutations(u, perms)
    return MappingResult(perms, u_per, int(map_k), indicator(u_per, region0, map_k))


def default_map_k_candidates(n):
    return sorted({max(1, n // 3), max(1, n // 2), max(1, 2 * n // 3)})


def select_map_k(u, partition, plan, candidates=None, sort_main_path=False):
    """Try each ``map_k`` and keep the one yielding most angles below 0.1.

    Ties go to the smaller ``map_k``.
    """
    u = np.asarray(u)
    n = u.shape[0]
    if candidates is None:
        candidates = default_map_k_candidates(n)
    cands = check_int_list(candidates, "map_k candidates")
    if any(k > n for k in cands):
        raise ValueError(f"map_k candidates must lie in [1, {n}]")
    best = None
    counts = {}
    for k in sorted(set(cands)):
        res = map_unitary(u, partition, k, sort_main_path)
        d = decompose(res.permuted_unitary, plan)
        count = int(np.count_nonzero(np.abs(d.thetas) < SMALL_ANGLE))
        counts[k] = count
        if best is None or count > best[0]:
            best = (count, res, d)
    count, res, d = best
    return MappingResult(res.permutations, res.permuted_unitary, res.map_k,
                         res.indicator_value, count, d, counts)


def relabel_records(p):
    """``(input_map, output_map)``: prepare logical input ``i`` on physical
    qumode ``input_map[i]``; physical output ``i`` is logical output
    ``output_map[i]``."""
    return p.col_perm.copy(), p.row_perm.copy()
