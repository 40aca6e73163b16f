"""Probabilistic beamsplitter dropout.

The pipeline:

1. ``find_threshold`` picks the angle cut ``theta_cut`` such that dropping
   every beamsplitter with ``|theta| < theta_cut`` keeps the reconstruction
   fidelity just above ``tau``; ``kept_count`` (M) survivors remain.
2. ``build_distribution`` weighs every block by ``|theta / theta_cut| ** K``.
3. ``select_power_k`` estimates, for each candidate ``K``, the mean fidelity
   of ``L`` random keep-sets of size M and keeps the best ``K``.
4. ``sample_kept_set`` draws one keep-set per shot.

Keep-sets are drawn without replacement with Gumbel-top-M keys, which has the
same law as M sequential weighted draws with renormalisation and works in log
space, so large powers never underflow.
"""

from dataclasses import dataclass, field

import numpy as np

from .decomposer import reconstruction_fidelity
from .validation import check_int_list, check_positive_int, check_tau

DEFAULT_POWERS = (1, 2, 5, 10, 20, 50, 100)
DEFAULT_ITERATIONS = 50


class UnreachableFidelityError(ValueError):
    def __init__(self, tau, best):
        self.tau = tau
        self.best = best
        super().__init__(
            f"target fidelity {tau} is unreachable: the undropped circuit reaches {best:.12f}"
        )


class DegenerateDistributionError(ValueError):
    """All rotation angles are zero, so no weighting exists."""


@dataclass(frozen=True)
class DropoutModel:
    tau: float
    theta_cut: float
    kept_count: int
    power_k: int
    probs: np.ndarray
    iterations: int
    mean_fidelity: float
    log_probs: np.ndarray = field(repr=False, default=None)
    candidate_fidelities: dict = field(default_factory=dict)

    @property
    def n_blocks(self):
        return len(self.probs)


def deterministic_cut(d, theta_cut):
    """Keep-mask retaining exactly the blocks with ``|theta| >= theta_cut``."""
    if theta_cut < 0:
        raise ValueError("theta_cut must be >= 0")
    return np.abs(d.thetas) >= theta_cut


def _candidate_cuts(abs_thetas):
    positives = np.unique(abs_thetas[abs_thetas > 0])
    top = positives[-1] if positives.size else 0.0
    drop_all = np.nextafter(top, np.inf)
    if np.any(abs_thetas == 0) or positives.size == 0:
        # zero-angle blocks are identities: always dropped
        return np.concatenate([positives, [drop_all]])
    # a cut at the smallest angle drops nothing, same as 0
    return np.concatenate([[0.0], positives[1:], [drop_all]])


def find_threshold(d, u, tau, refine_window=16):
    """Largest angle cut whose deterministic drop keeps fidelity >= ``tau``.

    Candidate cuts are the distinct ``|theta|`` values in ascending order.
    A bisection locates a crossing (fidelity >= tau at one cut, < tau at the
    next); a forward window of ``refine_window`` further cuts is then scanned
    and the search restarts from any later cut that still meets ``tau``,
    since fidelity is not guaranteed to be monotone in the cut.

    Returns ``(theta_cut, kept_count)``.
    """
    tau = check_tau(tau)
    abs_t = np.abs(d.thetas)
    cuts = _candidate_cuts(abs_t)
    cache = {}

    def fid(j):
        if j not in cache:
            cache[j] = reconstruction_fidelity(d, u, abs_t >= cuts[j])
        return cache[j]

    if fid(0) < tau:
        full = reconstruction_fidelity(d, u)
        raise UnreachableFidelityError(tau, max(full, fid(0)))
    last = len(cuts) - 1
    lo = 0
    while True:
        if fid(last) >= tau:
            lo = last
            break
        hi = last
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if fid(mid) >= tau:
                lo = mid
            else:
                hi = mid
        later = [j for j in range(lo + 2, min(lo + 2 + refine_window, last + 1)) if fid(j) >= tau]
        if not later:
            break
        lo = later[-1]
    theta_cut = float(cuts[lo])
    return theta_cut, int(np.count_nonzero(abs_t >= theta_cut))


def _log_weights(thetas, theta_cut, power_k):
    abs_t = np.abs(np.asarray(thetas, dtype=float))
    if not np.any(abs_t > 0):
        raise DegenerateDistributionError("all rotation angles are zero")
    if not theta_cut > 0:
        raise ValueError("theta_cut must be > 0 to build a distribution")
    with np.errstate(divide="ignore"):
        logw = power_k * (np.log(abs_t) - np.log(theta_cut))
    top = np.max(logw)
    return logw - (top + np.log(np.sum(np.exp(logw - top))))


def build_distribution(thetas, theta_cut, power_k):
    """``p_i = |theta_i / theta_cut|^K / sum_j |theta_j / theta_cut|^K``."""
    check_positive_int(power_k, "power_k")
    return np.exp(_log_weights(thetas, theta_cut, power_k))


def _draw_keep(log_probs, kept_count, rng):
    k = len(log_probs)
    mask = np.zeros(k, dtype=bool)
    if kept_count >= k:
        mask[:] = True
    elif kept_count > 0:
        keys = log_probs + rng.gumbel(size=k)
        mask[np.argpartition(-keys, kept_count - 1)[:kept_count]] = True
    return mask


def select_power_k(d, u, tau, theta_cut, kept_count, k_candidates=DEFAULT_POWERS,
                   iterations=DEFAULT_ITERATIONS, seed=0):
    """Choose the power ``K`` that maximises the mean sampled fidelity.

    Every candidate sees the same ``iterations`` random streams (split from
    ``seed``), so candidates are compared on common random numbers and the
    result does not depend on evaluation order. Ties go to the larger ``K``.
    """
    ks = check_int_list(k_candidates, "k_candidates")
    iterations = check_positive_int(iterations, "iterations")
    streams = np.random.SeedSequence(seed).spawn(iterations)
    n_blocks = len(d)
    # the cut only rescales the weights; a zero cut (nothing dropped) uses unit scale
    scale = theta_cut if theta_cut > 0 else 1.0
    try:
        log_weights = {k: _log_weights(d.thetas, scale, k) for k in ks}
    except DegenerateDistributionError:
        log_weights = {k: np.full(n_blocks, -np.log(max(n_blocks, 1))) for k in ks}
        kept_count = 0

    scores = {}
    for k in ks:
        total = 0.0
        for ss in streams:
            mask = _draw_keep(log_weights[k], kept_count, np.random.default_rng(ss))
            total += reconstruction_fidelity(d, u, mask)
        scores[k] = total / iterations
    best = max(ks, key=lambda k: (scores[k], k))
    lp = log_weights[best]
    return DropoutModel(
        tau=float(tau),
        theta_cut=float(theta_cut),
        kept_count=int(kept_count),
        power_k=int(best),
        probs=np.exp(lp),
        iterations=iterations,
        mean_fidelity=float(scores[best]),
        log_probs=lp,
        candidate_fidelities=scores,
    )


def fit_dropout(d, u, tau, k_candidates=DEFAULT_POWERS, iterations=DEFAULT_ITERATIONS, seed=0):
    theta_cut, kept = find_threshold(d, u, tau)
    return select_power_k(d, u, tau, theta_cut, kept, k_candidates, iterations, seed)


def model_from_params(thetas, tau, theta_cut, kept_count, power_k, iterations=DEFAULT_ITERATIONS,
                      mean_fidelity=float("nan")):
    """Rebuild a model from its stored scalars (e.g. a compile report)."""
    try:
        lp = _log_weights(thetas, theta_cut if theta_cut > 0 else 1.0, power_k)
    except DegenerateDistributionError:
        lp = np.full(len(thetas), -np.log(max(len(thetas), 1)))
    return DropoutModel(float(tau), float(theta_cut), int(kept_count), int(power_k), np.exp(lp),
                        int(iterations), float(mean_fidelity), lp)


def sample_kept_set(model, seed):
    """One keep-mask with exactly ``model.kept_count`` beamsplitters."""
    lp = model.log_probs if model.log_probs is not None else np.log(model.probs)
    return _draw_keep(lp, model.kept_count, np.random.default_rng(seed))


def sample_masks(model, shots, seed):
    """``shots`` independent keep-masks, one random stream per shot."""
    if shots < 0:
        raise ValueError("shots must be >= 0")
    streams = np.random.SeedSequence(seed).spawn(shots) if shots else []
    return [sample_kept_set(model, ss) for ss in streams]
