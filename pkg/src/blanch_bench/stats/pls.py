"""Single-response partial least squares (NIPALS) with VIP scores."""

from dataclasses import dataclass, field

import numpy as np

MAX_CV_COMPONENTS = 10
# a component whose weight vector norm falls below this fraction of the
# first one is treated as extracting from a numerically zero residual
_ZERO_RESIDUAL = 1e-10


@dataclass(frozen=True, eq=False)
class PlsModel:
    """Fitted PLS1 model.

    Weights, loadings and scores refer to the centred (and, if
    ``scaled``, unit-variance) predictors. ``coefficients`` and
    ``intercept`` act on raw predictors.
    """

    n_components: int
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    weights: np.ndarray  # (p, A), unit columns
    loadings: np.ndarray  # (p, A)
    y_loadings: np.ndarray  # (A,)
    scores: np.ndarray  # (n, A)
    coefficients: np.ndarray  # (p,) on raw predictors
    intercept: float
    fitted_r2: float
    x_residual_norms: np.ndarray  # Frobenius norm of X after each deflation, starting with the input
    scaled: bool = True
    requested_components: int = None
    cv_press: dict = field(default_factory=dict)  # A -> leave-one-out PRESS, when A was selected by CV

    @property
    def n_features(self):
        return self.x_mean.size

    def explained_y(self):
        """Sum of squares of y explained by each component."""
        return self.y_loadings**2 * np.sum(self.scores**2, axis=0)


def _prepare(X, y, scale):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be 2-D with one row per response value")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("X and y must be finite")
    x_mean = X.mean(axis=0)
    if scale:
        x_scale = X.std(axis=0, ddof=1) if X.shape[0] > 1 else np.ones(X.shape[1])
        x_scale = np.where(x_scale > 0, x_scale, 1.0)
    else:
        x_scale = np.ones(X.shape[1])
    y_mean = float(y.mean())
    return X, y, x_mean, x_scale, y_mean


def _nipals(E, f, n_components):
    """Sequential extraction; returns W, P, q, T, residual norms (may stop early)."""
    E = E.copy()
    f = f.copy()
    W, P, q, T = [], [], [], []
    norms = [float(np.linalg.norm(E))]
    first = None
    for _ in range(n_components):
        w = E.T @ f
        nw = float(np.linalg.norm(w))
        if first is None:
            first = nw
        if nw == 0.0 or nw <= _ZERO_RESIDUAL * first:
            break
        w /= nw
        k = int(np.argmax(np.abs(w)))
        if w[k] < 0:
            w = -w
        t = E @ w
        tt = float(t @ t)
        if tt <= 0.0:
            break
        p = E.T @ t / tt
        qa = float(f @ t) / tt
        E -= np.outer(t, p)
        f = f - qa * t
        W.append(w)
        P.append(p)
        q.append(qa)
        T.append(t)
        norms.append(float(np.linalg.norm(E)))
    n, m = E.shape
    a = len(W)
    return (
        np.array(W).T.reshape(m, a),
        np.array(P).T.reshape(m, a),
        np.array(q),
        np.array(T).T.reshape(n, a),
        np.array(norms),
    )


def _scaled_coefficients(W, P, q, a):
    if a == 0:
        return np.zeros(W.shape[0])
    Wa, Pa = W[:, :a], P[:, :a]
    return Wa @ np.linalg.solve(Pa.T @ Wa, q[:a])


def max_components(n_rows, n_cols):
    return max(0, min(n_rows - 1, n_cols))


def _loo_press(X, y, scale, a_max):
    """Leave-one-out prediction error sum of squares for A = 1..a_max."""
    n = X.shape[0]
    press = np.zeros(a_max)
    for i in range(n):
        keep = np.arange(n) != i
        Xi, yi, xm, xs, ym = _prepare(X[keep], y[keep], scale)
        E = (Xi - xm) / xs
        W, P, q, _, _ = _nipals(E, yi - ym, a_max)
        xt = (X[i] - xm) / xs
        for a in range(1, a_max + 1):
            b = _scaled_coefficients(W, P, q, min(a, W.shape[1]))
            press[a - 1] += (y[i] - ym - xt @ b) ** 2
    return press


def pls_fit(X, y=None, n_components=None, scale=True):
    """Fit a PLS1 model.

    Parameters
    ----------
    X : ndarray (n, p) or RegressionDataset
        Predictors, or a dataset carrying both X and y.
    y : ndarray (n,), optional
        Response, when X is an array.
    n_components : int, optional
        Number of latent components. When omitted it is chosen by
        leave-one-out cross-validation over 1..min(10, p, n - 1),
        taking the smallest A with minimal PRESS.
    scale : bool
        Scale predictors to unit variance after centring.

    Returns
    -------
    PlsModel

    Raises
    ------
    ValueError
        On a constant response or an out-of-range component count.
    """
    if y is None:
        X, y = X.X, X.y
    X, y, x_mean, x_scale, y_mean = _prepare(X, y, scale)
    n, p = X.shape
    a_lim = max_components(n, p)
    if a_lim < 1:
        raise ValueError("need at least 2 rows and 1 column")
    yc = y - y_mean
    if not np.any(yc != 0.0):
        raise ValueError("response has zero variance")

    cv_press = {}
    if n_components is None:
        a_max = min(MAX_CV_COMPONENTS, a_lim)
        press = _loo_press(X, y, scale, a_max)
        cv_press = {a + 1: float(v) for a, v in enumerate(press)}
        best = float(press.min())
        # smallest A within rounding of the best PRESS
        requested = int(np.flatnonzero(press <= best * (1 + 1e-12))[0]) + 1
    else:
        requested = int(n_components)
        if not 1 <= requested <= a_lim:
            raise ValueError(f"n_components must lie in 1..{a_lim}")

    E = (X - x_mean) / x_scale
    W, P, q, T, norms = _nipals(E, yc, requested)
    a = W.shape[1]
    b_scaled = _scaled_coefficients(W, P, q, a)
    coef = b_scaled / x_scale
    intercept = y_mean - float(x_mean @ coef)
    fitted = intercept + X @ coef
    r2 = r_squared(y, fitted)
    arrays = [x_mean, x_scale, W, P, q, T, coef, norms]
    for arr in arrays:
        arr.setflags(write=False)
    return PlsModel(
        n_components=a,
        x_mean=x_mean,
        x_scale=x_scale,
        y_mean=y_mean,
        weights=W,
        loadings=P,
        y_loadings=q,
        scores=T,
        coefficients=coef,
        intercept=float(intercept),
        fitted_r2=float(r2),
        x_residual_norms=norms,
        scaled=bool(scale),
        requested_components=requested,
        cv_press=cv_press,
    )


def pls_predict(model, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ValueError(f"X has {X.shape[1]} columns, model expects {model.n_features}")
    return model.intercept + X @ model.coefficients


def vip_scores(model):
    """Variable importance in projection for each predictor.

    VIP_j = sqrt(p * sum_a SSY_a (w_aj / |w_a|)^2 / sum_a SSY_a)
    """
    if model.n_components < 1:
        raise ValueError("model has no components")
    ssy = model.explained_y()
    total = float(ssy.sum())
    if not total > 0:
        raise ValueError("model explains no variance in y")
    W = model.weights / np.linalg.norm(model.weights, axis=0)
    p = W.shape[0]
    return np.sqrt(p * (W**2 @ ssy) / total)


def r_squared(y, y_hat):
    """Coefficient of determination 1 - SS_res / SS_tot."""
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.size != y_hat.size:
        raise ValueError("y and y_hat differ in length")
    if y.size < 2:
        raise ValueError("need at least 2 values")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("y is constant")
    return 1.0 - float(np.sum((y - y_hat) ** 2)) / ss_tot
