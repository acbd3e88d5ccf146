"""Simple linear regression with an F-test on the slope."""

from dataclasses import dataclass

import numpy as np

from .special import f_survival

SIGNIFICANT_P = 0.05
TREND_P = 0.10


@dataclass(frozen=True)
class OlsResult:
    slope: float
    intercept: float
    r2: float
    f_stat: float
    p_value: float
    n: int

    @property
    def flag(self):
        """``"significant"`` below 0.05, ``"trend"`` below 0.10, else ``"none"``."""
        if self.p_value < SIGNIFICANT_P:
            return "significant"
        if self.p_value < TREND_P:
            return "trend"
        return "none"

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "f_stat": self.f_stat,
            "p_value": self.p_value,
            "n": self.n,
            "flag": self.flag,
        }


def ols_fit(x, y):
    """Least-squares line y = slope * x + intercept with its F-test.

    F = (n - 2) R^2 / (1 - R^2) on (1, n - 2) degrees of freedom.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError("x and y differ in length")
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 observations")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("x is constant")
    sxy = float(np.sum((x - xm) * (y - ym)))
    syy = float(np.sum((y - ym) ** 2))
    slope = sxy / sxx
    intercept = ym - slope * xm
    if syy == 0.0:
        r2 = 0.0
    else:
        ss_res = float(np.sum((y - intercept - slope * x) ** 2))
        r2 = min(max(1.0 - ss_res / syy, 0.0), 1.0)
    f_stat = np.inf if r2 >= 1.0 else (n - 2) * r2 / (1.0 - r2)
    p = f_survival(f_stat, 1, n - 2)
    return OlsResult(float(slope), float(intercept), float(r2), float(f_stat), float(p), int(n))
