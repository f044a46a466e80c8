"""Stationary Gaussian sequence models with known dependence decay.

Three families are built in: iid Gaussians, the stationary AR(1) recursion,
and finite moving averages. All are centered Gaussian, so the marginal law is
known exactly and the maximal-correlation coefficient between past and future
is available in closed form (for the moving average, the figure exposed for
lags inside the window is the largest absolute cross-correlation over the
gap; beyond the window it is exactly zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtr, ndtri

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# random() can return 0.0, which ndtri maps to -inf; clamp one ulp above.
_U_MIN = 2.0**-53


@dataclass(frozen=True)
class ProcessModel:
    """family is one of "iid", "ar1", "ma".

    phi is the AR(1) coefficient; weights is the moving-average window, with
    weights[j] multiplying the innovation j steps back. innovation_sd scales
    the driving white noise. All marginals are centered.
    """

    family: str
    phi: float = 0.0
    weights: tuple[float, ...] = ()
    innovation_sd: float = 1.0

    def __post_init__(self):
        if self.family not in ("iid", "ar1", "ma"):
            raise ValueError(f"unknown process family {self.family!r}")
        if not (self.innovation_sd > 0.0 and math.isfinite(self.innovation_sd)):
            raise ValueError(f"innovation_sd must be positive, got {self.innovation_sd}")
        if self.family == "ar1":
            if not abs(self.phi) < 1.0:
                raise ValueError(f"AR(1) needs |phi| < 1 for stationarity, got phi={self.phi}")
        elif self.phi != 0.0:
            raise ValueError("phi is only meaningful for the ar1 family")
        if self.family == "ma":
            w = self.weights
            if len(w) == 0:
                raise ValueError("ma family needs a nonempty weight window")
            if not all(math.isfinite(x) for x in w):
                raise ValueError("ma weights must be finite")
            if all(x == 0.0 for x in w):
                raise ValueError("ma weights must not all be zero")
            object.__setattr__(self, "weights", tuple(float(x) for x in w))
        elif self.weights != ():
            raise ValueError("weights are only meaningful for the ma family")

    @property
    def marginal_sd(self) -> float:
        if self.family == "iid":
            return self.innovation_sd
        if self.family == "ar1":
            return self.innovation_sd / math.sqrt(1.0 - self.phi * self.phi)
        return self.innovation_sd * math.sqrt(sum(x * x for x in self.weights))

    @property
    def window_order(self) -> int:
        """Number of lags a moving average looks back; 0 otherwise."""
        return len(self.weights) - 1 if self.family == "ma" else 0


@dataclass(frozen=True, eq=False)
class SamplePath:
    values: np.ndarray
    model: ProcessModel
    seed: int

    def __len__(self) -> int:
        return self.values.size


def _standard_normals(seed: int, count: int) -> np.ndarray:
    """`count` standard normals from the Philox stream keyed by `seed`.

    One uniform is consumed per normal, by inverse CDF, so the draw count is
    deterministic and a longer request extends a shorter one exactly.
    """
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed & 0xFFFFFFFFFFFFFFFF)))
    u = gen.random(count)
    np.maximum(u, _U_MIN, out=u)
    return ndtri(u)


def generate_path(model: ProcessModel, n: int, seed: int) -> SamplePath:
    """Draw X_0..X_{n-1} from the stationary law of `model`.

    The same (model, n, seed) triple always produces the same bits, and the
    first m values of a length-n path equal the length-m path for m <= n.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"path length must be an integer >= 1, got {n!r}")
    if model.family == "iid":
        values = model.innovation_sd * _standard_normals(seed, n)
    elif model.family == "ar1":
        z = _standard_normals(seed, n)
        e = model.innovation_sd * z
        # Exact stationary start: X_0 gets the marginal sd, the recursion
        # X_t = phi X_{t-1} + e_t does the rest. For phi = 0 the filter is
        # the identity and the path is bitwise the iid path.
        e[0] = model.marginal_sd * z[0]
        values = lfilter([1.0], [1.0, -model.phi], e)
    else:
        q = model.window_order
        eps = model.innovation_sd * _standard_normals(seed, n + q)
        w = np.asarray(model.weights, dtype=float)
        # X_t = sum_j w_j eps_{t-j}; the q warm-up innovations make X_0
        # stationary, and index t never touches innovations past t, so the
        # prefix property carries over from the innovation stream.
        values = np.convolve(eps, w, mode="full")[q : q + n]
    return SamplePath(values=values, model=model, seed=seed)


def marginal_density(model: ProcessModel, x):
    """Stationary one-dimensional density f(x); vectorized over x."""
    s = model.marginal_sd
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * (x / s) ** 2) / (s * _SQRT_2PI)
    return out if out.ndim else float(out)


def marginal_cdf(model: ProcessModel, x):
    """Stationary one-dimensional distribution function F(x)."""
    s = model.marginal_sd
    x = np.asarray(x, dtype=float)
    out = ndtr(x / s)
    return out if out.ndim else float(out)


def marginal_density_derivative_sup(model: ProcessModel) -> float:
    """sup_x |f'(x)|, attained at one marginal sd from the center."""
    s = model.marginal_sd
    return math.exp(-0.5) / (_SQRT_2PI * s * s)


def _check_lag(lag) -> None:
    if not isinstance(lag, int) or isinstance(lag, bool) or lag < 1:
        raise ValueError(f"lag must be an integer >= 1, got {lag!r}")


def rho_mixing_coefficient(model: ProcessModel, lag: int) -> float:
    """Correlation-decay coefficient between the past and the lag-step future.

    For Gaussian sequences the maximal correlation between sigma-fields
    separated by `lag` steps reduces to a correlation computation:
    iid gives 0, AR(1) gives |phi|^lag. For a moving average of window
    order q the sequence is q-dependent, so the coefficient is exactly 0 for
    lag > q; inside the window the value exposed is the largest absolute
    autocorrelation at separations >= lag, which is the operative figure for
    every summability certificate used here.
    """
    _check_lag(lag)
    if model.family == "iid":
        return 0.0
    if model.family == "ar1":
        return abs(model.phi) ** lag
    q = model.window_order
    if lag > q:
        return 0.0
    w = np.asarray(model.weights, dtype=float)
    denom = float(w @ w)
    best = 0.0
    for j in range(lag, q + 1):
        best = max(best, abs(float(w[: len(w) - j] @ w[j:])) / denom)
    return best


def rho_decay(model: ProcessModel, lag: float) -> float:
    """rho_mixing_coefficient extended to real lag >= 0 for Markov families.

    The block-moment machinery interpolates gap lengths, which needs the
    decay curve at non-integer arguments. That extension is only canonical
    when the decay is a pure power (iid, ar1); moving averages are refused.
    """
    if model.family == "ma":
        raise ValueError("real-lag decay is only defined for the iid and ar1 families")
    if not (lag >= 0.0):
        raise ValueError(f"lag must be >= 0, got {lag!r}")
    if model.family == "iid":
        return 0.0 if lag > 0 else 1.0
    return abs(model.phi) ** lag


def mixing_tail_bound(model: ProcessModel, power: float = 1.0) -> dict:
    """Certificate for sum_i rho(2^i)^power over i = 0..40.

    Returns the partial sum and the first omitted term; for every built-in
    family the omitted tail is below 1e-12 (geometric decay or exact zeros),
    which is what the experiment gates record.
    """
    if not power > 0.0:
        raise ValueError(f"power must be positive, got {power}")
    total = 0.0
    for i in range(41):
        total += rho_mixing_coefficient(model, 2**i) ** power
    first_omitted = rho_mixing_coefficient(model, 2**41) ** power
    return {"partial_sum": total, "first_omitted_term": first_omitted}


def conditional_mean(model: ProcessModel, last_value: float, horizon: int) -> float:
    """E[X_{t+horizon} | X_t = last_value] for Markov families.

    A moving average is not Markov in its own value, so it is refused; the
    AR(1) answer is phi^horizon times the conditioning value.
    """
    if model.family == "ma":
        raise ValueError("conditional_mean needs the Markov property; the ma family is not "
                         "Markov in its own value")
    if not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1:
        raise ValueError(f"horizon must be an integer >= 1, got {horizon!r}")
    if model.family == "iid":
        return 0.0
    return model.phi**horizon * float(last_value)
