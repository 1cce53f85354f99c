"""Alpha-stable severities in Nolan's S(0) parameterisation.

Sampling covers the whole family (Chambers-Mallows-Stuck). Exact
densities are only available for the Lévy member (alpha=1/2, beta=1),
which is why :func:`levy_pdf` and :func:`levy_cdf` are written in terms of
the support edge rather than the S(0) location: for S(1/2, 1, gamma, delta; 0)
the support is ``[delta - gamma, inf)``. :func:`levy_params` and
:func:`levy_edge` convert between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import erfc

__all__ = [
    "StableParams",
    "levy_params",
    "levy_edge",
    "sample_stable",
    "levy_pdf",
    "levy_cdf",
    "levy_median",
    "stable_tail",
    "stable_mean",
    "convolve_params",
    "scale_shift_params",
    "TruncationMassError",
]

ALPHA_ONE_TOL = 1e-10
MAX_REJECTION_ATTEMPTS = 1_000_000


class TruncationMassError(RuntimeError):
    pass


@dataclass(frozen=True)
class StableParams:
    """S(alpha, beta, gamma, delta; 0), optionally restricted to x >= 0."""

    alpha: float
    beta: float
    gamma: float
    delta: float = 0.0
    truncated: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def is_levy(self) -> bool:
        return self.alpha == 0.5 and self.beta == 1.0

    @property
    def lower_support(self) -> float:
        """Left end of the support of the untruncated law (-inf unless totally skewed, alpha<1)."""
        if self.alpha < 1.0 and self.beta == 1.0:
            return self.delta - self.gamma * _tan_half_pi(self.alpha)
        return -math.inf


def levy_params(gamma: float, edge: float = 0.0, truncated: bool = False) -> StableParams:
    """Lévy law with scale ``gamma`` supported on ``[edge, inf)``."""
    return StableParams(0.5, 1.0, gamma, edge + gamma, truncated)


def levy_edge(params: StableParams) -> float:
    if not params.is_levy:
        raise ValueError("not a Lévy parameter set (alpha=0.5, beta=1)")
    return params.delta - params.gamma


def _tan_half_pi(alpha):
    # exact where the float tan is not
    if alpha == 0.5:
        return 1.0
    if alpha == 1.5:
        return -1.0
    if alpha == 2.0:
        return 0.0
    return math.tan(0.5 * math.pi * alpha)


def _standard_s1(alpha, beta, n, rng):
    """Draws from S(alpha, beta, 1, 0; 1) by Chambers-Mallows-Stuck."""
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, n)
    w = rng.standard_exponential(n)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        half_pi_bv = 0.5 * math.pi + beta * v
        return (2.0 / math.pi) * (
            half_pi_bv * np.tan(v) - beta * np.log(0.5 * math.pi * w * np.cos(v) / half_pi_bv)
        )
    zeta = -beta * _tan_half_pi(alpha)
    xi = math.atan(-zeta) / alpha
    scale = (1.0 + zeta * zeta) ** (0.5 / alpha)
    a_vx = alpha * (v + xi)
    return (
        scale
        * np.sin(a_vx)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - a_vx) / w) ** ((1.0 - alpha) / alpha)
    )


def _draw_untruncated(p: StableParams, n, rng):
    x1 = _standard_s1(p.alpha, p.beta, n, rng)
    if abs(p.alpha - 1.0) < ALPHA_ONE_TOL:
        # S(0) and S(1) locations differ by (2/pi) beta gamma log(gamma), which the S(1) scaling rule cancels
        return p.gamma * x1 + p.delta
    if p.is_levy:
        return p.gamma * x1 + (p.delta - p.gamma)
    return p.gamma * (x1 - p.beta * _tan_half_pi(p.alpha)) + p.delta


def sample_stable(params: StableParams, rng: np.random.Generator, size=None):
    """Draw from ``params``; returns a float when ``size`` is None.

    Truncated laws are sampled by rejecting negative draws. Lévy laws whose
    support already starts at or above zero skip the rejection step. More
    than 1e6 candidates per requested value raises
    :class:`TruncationMassError`.
    """
    n = 1 if size is None else int(np.prod(size))
    if not params.truncated or params.lower_support >= 0.0:
        out = _draw_untruncated(params, n, rng)
    else:
        out = np.empty(n)
        filled = 0
        drawn = 0
        rate = 1.0
        budget = MAX_REJECTION_ATTEMPTS * n
        while filled < n:
            need = n - filled
            batch = int(min(max(math.ceil(1.1 * need / rate), need), 4_000_000))
            cand = _draw_untruncated(params, batch, rng)
            drawn += batch
            keep = cand[cand >= 0.0][:need]
            out[filled : filled + keep.size] = keep
            filled += keep.size
            rate = max(filled / drawn, 1.0 / MAX_REJECTION_ATTEMPTS)
            if drawn > budget or (filled == 0 and drawn >= MAX_REJECTION_ATTEMPTS):
                raise TruncationMassError("truncation mass too small")
    if size is None:
        return float(out[0])
    return out.reshape(size)


def levy_pdf(x, gamma: float, delta: float = 0.0):
    """Lévy density with scale ``gamma`` on ``(delta, inf)``; zero elsewhere."""
    x = np.asarray(x, dtype=float)
    y = x - delta
    pos = y > 0
    ys = np.where(pos, y, 1.0)
    with np.errstate(over="ignore"):
        out = np.where(pos, math.sqrt(gamma / (2 * math.pi)) * ys**-1.5 * np.exp(-gamma / (2 * ys)), 0.0)
    return float(out) if out.ndim == 0 else out


def levy_cdf(x, gamma: float, delta: float = 0.0):
    """Lévy cdf ``erfc(sqrt(gamma / (2 (x - delta))))`` for x > delta, else 0."""
    x = np.asarray(x, dtype=float)
    y = x - delta
    pos = y > 0
    ys = np.where(pos, y, 1.0)
    with np.errstate(over="ignore"):
        out = np.where(pos, erfc(np.sqrt(gamma / (2 * ys))), 0.0)
    return float(out) if out.ndim == 0 else out


def levy_median(gamma: float, delta: float = 0.0) -> float:
    from .special import erfcinv

    return delta + gamma / (2.0 * erfcinv(0.5) ** 2)


def stable_tail(x, params: StableParams):
    """Power-law approximation of P(X > x), valid as x -> inf.

    ``gamma^alpha * c_alpha * (1 + beta) * x^(-alpha)`` with
    ``c_alpha = sin(pi alpha / 2) Gamma(alpha) / pi``.
    """
    if params.alpha >= 2.0:
        raise ValueError("the Gaussian case has no power-law tail")
    a = params.alpha
    c = math.sin(0.5 * math.pi * a) * math.gamma(a) / math.pi
    x = np.asarray(x, dtype=float)
    out = params.gamma**a * c * (1.0 + params.beta) * x ** (-a)
    return float(out) if out.ndim == 0 else out


def stable_mean(params: StableParams) -> float:
    """Mean of the untruncated law; ``math.inf`` when alpha <= 1."""
    if params.alpha <= 1.0:
        return math.inf
    return params.delta - params.beta * params.gamma * _tan_half_pi(params.alpha)


def convolve_params(components) -> StableParams:
    """Parameters of the sum of independent stable laws sharing one alpha."""
    components = list(components)
    if not components:
        raise ValueError("need at least one component")
    alpha = components[0].alpha
    if any(c.alpha != alpha for c in components):
        raise ValueError("all components must share the same alpha")
    ga = [abs(c.gamma) ** alpha for c in components]
    gamma = sum(ga) ** (1.0 / alpha)
    beta = sum(c.beta * g for c, g in zip(components, ga)) / sum(ga)
    delta = sum(c.delta for c in components)
    if len(components) > 1:
        if abs(alpha - 1.0) < ALPHA_ONE_TOL:
            delta += (2.0 / math.pi) * (
                beta * gamma * math.log(gamma)
                - sum(c.beta * c.gamma * math.log(abs(c.gamma)) for c in components)
            )
        else:
            delta += _tan_half_pi(alpha) * (beta * gamma - sum(c.beta * c.gamma for c in components))
    return StableParams(alpha, beta, gamma, delta, components[0].truncated)


def scale_shift_params(params: StableParams, a: float, b: float) -> StableParams:
    """Law of ``a X + b`` for X ~ params."""
    if a == 0:
        raise ValueError("scale factor a must be non-zero")
    return StableParams(
        params.alpha,
        math.copysign(1.0, a) * params.beta,
        abs(a) * params.gamma,
        a * params.delta + b,
        params.truncated,
    )
