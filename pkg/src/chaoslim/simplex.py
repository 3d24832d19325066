"""Ordered-simplex integrals of products of power-law gap factors.

The central object is

    D_k(chi) = int_{0 < t_1 < ... < t_k < 1}
               t_1^{-chi} (t_2-t_1)^{-chi} ... (t_k-t_{k-1})^{-chi}
               [ (1-t_k)^{-chi} ]  dt_1 ... dt_k

with the bracketed last-gap factor present in the "conditioned" variant and
absent in the "free" one.  Both have Gamma-function closed forms (Liouville /
Dirichlet-density identities), which power every continuum second-moment
series in the model modules.  A nested Gauss-Jacobi quadrature of the same
integral, built without the closed form, serves as the numerical oracle.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_jacobi

from .errors import DomainError, InputError


def dirichlet_closed_form(k: int, chi: float, conditioned: bool = True, t: float = 1.0) -> float:
    """Closed form of the ordered-simplex gap integral on (0, t).

    conditioned: t^{(k+1)(1-chi)-1} * Gamma(1-chi)^{k+1} / Gamma((k+1)(1-chi))
    free:        t^{k(1-chi)}       * Gamma(1-chi)^k     / Gamma(k(1-chi)+1)
    """
    if k < 0:
        raise InputError("k must be >= 0")
    if chi >= 1.0:
        raise DomainError(f"chi = {chi} >= 1: gap factors are not integrable")
    if t <= 0:
        raise DomainError("t must be positive")
    a = 1.0 - chi
    if conditioned:
        log_val = (k + 1) * gammaln(a) - gammaln((k + 1) * a) + ((k + 1) * a - 1) * math.log(t)
    else:
        log_val = k * gammaln(a) - gammaln(k * a + 1.0) + k * a * math.log(t)
    return float(math.exp(log_val))


@lru_cache(maxsize=128)
def _rule_01(order: int, upper: float, lower: float):
    """Nodes u and weights w with  int_0^1 g(u) (1-u)^upper u^lower du = sum w g(u).

    ``upper``/``lower`` are the endpoint exponents absorbed into the rule.
    """
    if upper == 0.0 and lower == 0.0:
        x, w = np.polynomial.legendre.leggauss(order)
    else:
        x, w = roots_jacobi(order, upper, lower)
    u = (x + 1.0) / 2.0
    return u, w * 2.0 ** (-(1.0 + upper + lower))


def _chain_eval(level: int, s: np.ndarray, chi: float, order: int) -> np.ndarray:
    """R_level(s) = int_{0<t_1<...<t_level<s} of the level+1 gap factors.

    R_0(s) = s^{-chi}; R_j(s) = int_0^s R_{j-1}(t) (s-t)^{-chi} dt.  After the
    substitution t = s*u both endpoint singularities u^{-chi}, (1-u)^{-chi}
    are absorbed into a Gauss-Jacobi rule; the residual R_{j-1}(s u) u^{chi}
    is mildly regular, so a moderate fixed order converges fast.
    """
    if level == 0:
        return s ** (-chi)
    u, w = _rule_01(order, -chi, -chi)
    inner = _chain_eval(level - 1, s[..., None] * u, chi, order)
    return s ** (1.0 - chi) * ((inner * u**chi) @ w)


def dirichlet_quadrature(
    k: int, chi: float, conditioned: bool = True, order: int = 32
) -> float:
    """Nested Gauss-Jacobi evaluation of the ordered-simplex gap integral.

    Independent of the Gamma closed form: the k-dimensional integral is
    evaluated as k nested one-dimensional quadratures with the power-law
    endpoint weights absorbed into each rule.  Cost grows like order**k.
    """
    if k < 0:
        raise InputError("k must be >= 0")
    if chi >= 1.0 or chi < 0.0:
        raise DomainError("need 0 <= chi < 1")
    if k == 0:
        return 1.0
    if order**k > 20_000_000:
        raise InputError("order**k too large; lower the order or k")
    if conditioned:
        u, w = _rule_01(order, -chi, -chi)
        vals = _chain_eval(k - 1, u, chi, order) * u**chi
        return float(vals @ w)
    u, w = _rule_01(order, 0.0, -chi)
    vals = _chain_eval(k - 1, u, chi, order) * u**chi
    return float(vals @ w)


def liouville_simplex_log(exponents, total: float = 1.0) -> float:
    """log of int over {g_i >= 0, sum g_i = total} of prod g_i^{a_i - 1} dg.

    ``exponents`` are the a_i (all > 0); the integral is over the
    (len-1)-dimensional surface measure obtained by eliminating the last gap.
    """
    a = np.asarray(exponents, dtype=float)
    if np.any(a <= 0):
        raise DomainError("all Liouville exponents must be positive")
    return float(np.sum(gammaln(a)) - gammaln(a.sum()) + (a.sum() - 1.0) * math.log(total))
