"""scikit-learn style front end for the compile pipeline."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .compiler import DEFAULT_TAU, compile_unitary
from .dropout import DEFAULT_ITERATIONS, DEFAULT_POWERS, sample_masks
from .validation import check_matrix


class InterferometerCompiler(BaseEstimator):
    """Compile one interferometer unitary into an MZI circuit.

    ``fit`` takes the N x N unitary itself (there is no sample axis); after
    fitting, ``transform`` pushes rows of mode amplitudes through the
    approximated interferometer.

    Parameters
    ----------
    device : str
        Lattice as ``"RxC"``.
    mode : str
        ``baseline``, ``rot-cut``, ``decomp-opt`` or ``full-opt``.
    tau : float
        Fidelity floor for the angle cut.
    map_k, power_k : sequence of int or None
        Candidate indicator ranks and dropout powers.
    iterations : int
        Sampled keep-sets per power when choosing K.
    random_state : int
        Seed for the dropout sampling.
    """

    def __init__(self, device="6x6", mode="full-opt", tau=DEFAULT_TAU, map_k=None,
                 power_k=DEFAULT_POWERS, iterations=DEFAULT_ITERATIONS, random_state=0):
        self.device = device
        self.mode = mode
        self.tau = tau
        self.map_k = map_k
        self.power_k = power_k
        self.iterations = iterations
        self.random_state = random_state

    def fit(self, U, y=None):
        res = compile_unitary(U, self.device, self.mode, self.tau, self.map_k, self.power_k,
                              self.iterations, self.random_state)
        self.circuit_ = res.circuit
        self.report_ = res.report
        self.decomposition_ = res.decomposition
        self.mapping_ = res.mapping
        self.dropout_model_ = res.model
        self.unitary_approx_ = res.circuit.logical_unitary()
        self.fidelity_ = res.report.fidelity_deterministic
        self.n_features_in_ = res.report.n
        return self

    def transform(self, X):
        """Output amplitudes ``X @ U_app.T`` for input amplitudes ``X``."""
        check_is_fitted(self, "unitary_approx_")
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} modes, compiler was fitted on {self.n_features_in_}")
        return X @ self.unitary_approx_.T

    def fit_transform(self, U, y=None):
        return self.fit(U).transform(np.eye(np.asarray(U).shape[0]))

    def sample_circuits(self, shots, seed=None):
        """Per-shot circuits with exactly ``kept_count`` beamsplitters each."""
        check_is_fitted(self, "circuit_")
        if self.dropout_model_ is None:
            raise ValueError(f"mode {self.mode!r} has no dropout model; use full-opt")
        seed = self.random_state if seed is None else seed
        return [self.circuit_.with_dropped(~m) for m in sample_masks(self.dropout_model_, shots, seed)]
