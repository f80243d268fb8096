"""Linear support vector regression with the epsilon-insensitive loss.

Solved in the dual by coordinate descent over the box ``[-C, C]``, the
intercept being an extra constant feature that is regularised like the
others. The epoch order is a seeded permutation, so fits are deterministic.
"""

from __future__ import annotations

import numba
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


@numba.njit(cache=True, nogil=True)
def _dual_cd(X, y, C, epsilon, tol, max_iter, seed):
    n, p = X.shape
    beta = np.zeros(n)
    w = np.zeros(p)
    qdiag = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(p):
            s += X[i, j] * X[i, j]
        qdiag[i] = s
    np.random.seed(seed)
    order = np.arange(n)
    first = -1.0
    it = 0
    while it < max_iter:
        it += 1
        np.random.shuffle(order)
        viol_sum = 0.0
        for k in range(n):
            i = order[k]
            H = qdiag[i]
            if H <= 0.0:
                continue
            G = -y[i]
            for j in range(p):
                G += w[j] * X[i, j]
            Gp = G + epsilon
            Gn = G - epsilon
            b = beta[i]
            if b == 0.0:
                if Gp < 0.0:
                    v = -Gp
                elif Gn > 0.0:
                    v = Gn
                else:
                    v = 0.0
            elif b >= C:
                v = Gp if Gp > 0.0 else 0.0
            elif b <= -C:
                v = -Gn if Gn < 0.0 else 0.0
            elif b > 0.0:
                v = abs(Gp)
            else:
                v = abs(Gn)
            viol_sum += v
            if Gp < H * b:
                d = -Gp / H
            elif Gn > H * b:
                d = -Gn / H
            else:
                d = -b
            nb = b + d
            if nb > C:
                nb = C
            elif nb < -C:
                nb = -C
            d = nb - b
            if d != 0.0:
                beta[i] = nb
                for j in range(p):
                    w[j] += d * X[i, j]
        if first < 0.0:
            first = viol_sum
        if viol_sum <= tol * max(first, 1e-12):
            break
    return w, it


def fit_linear_svr(X: np.ndarray, y: np.ndarray, C: float = 1.0, epsilon: float = 0.1,
                   tol: float = 1e-6, max_iter: int = 2000, seed: int = 0,
                   intercept_scaling: float = 1.0) -> tuple[np.ndarray, float, int]:
    """Return ``(coef, intercept, epochs)`` for already validated arrays."""
    Xa = np.empty((X.shape[0], X.shape[1] + 1))
    Xa[:, :-1] = X
    Xa[:, -1] = intercept_scaling
    w, epochs = _dual_cd(Xa, np.ascontiguousarray(y, dtype=float), float(C), float(epsilon),
                         float(tol), int(max_iter), int(seed))
    return w[:-1].copy(), float(w[-1] * intercept_scaling), int(epochs)


class LinearEpsilonSVR(RegressorMixin, BaseEstimator):
    """Linear SVR minimising ``0.5 ||w||^2 + C sum max(0, |y - Xw - b| - epsilon)``.

    Parameters
    ----------
    C : float, default=1.0
    epsilon : float, default=0.1
    tol : float, default=1e-6
        Stop when the summed projected-gradient violation of an epoch falls
        below ``tol`` times that of the first epoch.
    max_iter : int, default=2000
        Maximum number of passes over the samples.
    random_state : int, default=0
        Seeds the per-epoch coordinate order.
    """

    def __init__(self, C=1.0, epsilon=0.1, tol=1e-6, max_iter=2000, random_state=0):
        self.C = C
        self.epsilon = epsilon
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        if self.C <= 0 or self.epsilon < 0:
            raise ValueError("C must be positive and epsilon nonnegative")
        self.coef_, self.intercept_, self.n_iter_ = fit_linear_svr(
            X, y, self.C, self.epsilon, self.tol, self.max_iter, self.random_state)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_ + self.intercept_
