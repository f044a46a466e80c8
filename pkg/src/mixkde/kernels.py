"""Kernel families, their integrated forms, and the constants the limits use.

Four classical second-order kernels are provided. Their norms and Lipschitz
constants are stored in closed form rather than recomputed by quadrature, so
every normalization downstream is bit-stable; the test suite checks the stored
numbers against adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

# Beyond 8 standard deviations the Gaussian kernel is below 1.3e-15 of its
# peak; windowed evaluation treats it as compactly supported at this radius.
GAUSSIAN_TAIL_RADIUS = 8.0

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel and the analytic constants consumed by the limit theorems.

    lipschitz_const is None when the kernel has no finite Lipschitz constant
    (the uniform kernel jumps at its support edge); callers that need
    smoothness must treat None as "not Lipschitz" and refuse.
    """

    family: str
    l1_norm: float
    l2_norm_sq: float
    sup_norm: float
    support_radius: float
    lipschitz_const: float | None
    is_symmetric: bool = True
    integrates_to_one: bool = True

    @property
    def effective_radius(self) -> float:
        """Window radius for truncated evaluation; finite for every family."""
        return min(self.support_radius, GAUSSIAN_TAIL_RADIUS)


GAUSSIAN = KernelSpec(
    family="gaussian",
    l1_norm=1.0,
    l2_norm_sq=1.0 / (2.0 * math.sqrt(math.pi)),
    sup_norm=1.0 / _SQRT_2PI,
    support_radius=math.inf,
    # sup |K'| is attained at u = 1: phi(1) = e^{-1/2}/sqrt(2 pi).
    lipschitz_const=math.exp(-0.5) / _SQRT_2PI,
)

EPANECHNIKOV = KernelSpec(
    family="epanechnikov",
    l1_norm=1.0,
    l2_norm_sq=0.6,
    sup_norm=0.75,
    support_radius=1.0,
    lipschitz_const=1.5,
)

TRIANGULAR = KernelSpec(
    family="triangular",
    l1_norm=1.0,
    l2_norm_sq=2.0 / 3.0,
    sup_norm=1.0,
    support_radius=1.0,
    lipschitz_const=1.0,
)

UNIFORM = KernelSpec(
    family="uniform",
    l1_norm=1.0,
    l2_norm_sq=0.5,
    sup_norm=0.5,
    support_radius=1.0,
    lipschitz_const=None,
)

FAMILIES: dict[str, KernelSpec] = {
    "gaussian": GAUSSIAN,
    "epanechnikov": EPANECHNIKOV,
    "triangular": TRIANGULAR,
    "uniform": UNIFORM,
}


def kernel_from_name(name: str) -> KernelSpec:
    try:
        return FAMILIES[name]
    except KeyError:
        known = ", ".join(sorted(FAMILIES))
        raise ValueError(f"unknown kernel family {name!r}; expected one of: {known}") from None


def evaluate(kernel: KernelSpec, u):
    """K(u) for a scalar or array argument; exactly zero outside the support."""
    u = np.asarray(u, dtype=float)
    fam = kernel.family
    if fam == "gaussian":
        out = np.exp(-0.5 * u * u) / _SQRT_2PI
    elif fam == "epanechnikov":
        out = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    elif fam == "triangular":
        out = np.maximum(0.0, 1.0 - np.abs(u))
    elif fam == "uniform":
        out = np.where(np.abs(u) <= 1.0, 0.5, 0.0)
    else:  # pragma: no cover - specs are built by this module
        raise ValueError(f"unknown kernel family {fam!r}")
    return out if out.ndim else float(out)


def kernel_cdf(kernel: KernelSpec, u):
    """G_K(u) = integral of K over (-inf, u], in closed form per family."""
    u = np.asarray(u, dtype=float)
    fam = kernel.family
    if fam == "gaussian":
        out = ndtr(u)
    elif fam == "epanechnikov":
        v = np.clip(u, -1.0, 1.0)
        out = 0.5 + 0.75 * v - 0.25 * v**3
    elif fam == "triangular":
        v = np.clip(u, -1.0, 1.0)
        out = np.where(v <= 0.0, 0.5 * (1.0 + v) ** 2, 0.5 + v - 0.5 * v * v)
    elif fam == "uniform":
        out = np.clip(0.5 * (u + 1.0), 0.0, 1.0)
    else:  # pragma: no cover
        raise ValueError(f"unknown kernel family {fam!r}")
    return out if out.ndim else float(out)


def kernel_constants(kernel: KernelSpec) -> dict:
    """The stored analytic constants, keyed by name."""
    return {
        "l1_norm": kernel.l1_norm,
        "l2_norm_sq": kernel.l2_norm_sq,
        "sup_norm": kernel.sup_norm,
        "support_radius": kernel.support_radius,
        "lipschitz_const": kernel.lipschitz_const,
    }


def abs_first_moment(kernel: KernelSpec) -> float:
    """integral of |u| K(u) du, used by first-order bias bounds."""
    fam = kernel.family
    if fam == "gaussian":
        return math.sqrt(2.0 / math.pi)
    if fam == "epanechnikov":
        return 0.375
    if fam == "triangular":
        return 1.0 / 3.0
    if fam == "uniform":
        return 0.5
    raise ValueError(f"unknown kernel family {fam!r}")  # pragma: no cover
