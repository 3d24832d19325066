"""Desk-scale critical 2D Ising with + boundary, and its random-field
perturbation.

Everything is computed by exact enumeration over the 2^n interior spin
configurations (n capped at 20), which is what makes the chaos-rewrite
identity

    Z = prod_x cosh(xi_x) * sum_{I subset interior} E+[sigma^I] tanh(xi)^I

an exact algebraic statement rather than a sampled one.  The inverse
temperature is pinned at the critical point beta_c = log(1+sqrt(2))/2.

Continuum geometry (distances to the domain boundary, the singular product
f_Omega and its L^2 growth ratios) is measured against the polygonal
boundary of the axis-aligned rectangle domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chaos import Kernel
from .errors import DomainError, InputError, ResourceError

BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))

# zeta'(-1) = 1/12 - log(Glaisher-Kinkelin constant)
ZETA_PRIME_MINUS_ONE = -0.16542114370045092921
# Normalization of the continuum spin correlations on mesh-delta lattices:
# 2^{5/48} * exp(-3 zeta'(-1) / 2).  Stored for reference; it multiplies the
# (externally supplied) continuum correlation functions and enters no
# computation here.  A mesh-sqrt(2)*delta lattice convention rescales it.
SPIN_CORRELATION_CONSTANT = 2.0 ** (5.0 / 48.0) * math.exp(-1.5 * ZETA_PRIME_MINUS_ONE)

_ENUM_CAP = 20
_NEIGHBOR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class Rect:
    """Open axis-aligned rectangle (x0, x1) x (y0, y1)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise InputError("degenerate rectangle")

    @classmethod
    def unit_square(cls) -> "Rect":
        return cls(0.0, 0.0, 1.0, 1.0)

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        return self.x0 < x < self.x1 and self.y0 < y < self.y1

    def boundary_distance(self, p) -> float:
        x, y = float(p[0]), float(p[1])
        return min(x - self.x0, self.x1 - x, y - self.y0, self.y1 - y)

    def sample_interior(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random((size, 2))
        return np.stack(
            [self.x0 + u[:, 0] * (self.x1 - self.x0), self.y0 + u[:, 1] * (self.y1 - self.y0)],
            axis=-1,
        )


@dataclass(frozen=True)
class LatticeSpinSystem:
    """Finite sublattice of Z^2 with + boundary on its nearest-neighbor hull."""

    interior: tuple[tuple[int, int], ...]
    beta: float = BETA_C

    def __post_init__(self):
        sites = tuple(sorted((int(a), int(b)) for a, b in self.interior))
        if len(set(sites)) != len(sites):
            raise InputError("repeated interior sites")
        if not sites:
            raise InputError("interior must be non-empty")
        if len(sites) > _ENUM_CAP:
            raise ResourceError(
                f"{len(sites)} interior spins exceed the enumeration cap {_ENUM_CAP}"
            )
        object.__setattr__(self, "interior", sites)
        object.__setattr__(self, "_cache", {})

    @classmethod
    def rectangle(cls, width: int, height: int, beta: float = BETA_C) -> "LatticeSpinSystem":
        return cls(
            tuple((i, j) for i in range(width) for j in range(height)), beta=beta
        )

    @classmethod
    def from_domain(cls, domain: Rect, delta: float, beta: float = BETA_C) -> "LatticeSpinSystem":
        """Interior sites of Omega cap (delta Z)^2, stored as integer coords."""
        if delta <= 0:
            raise InputError("delta must be positive")
        i0, i1 = math.floor(domain.x0 / delta), math.ceil(domain.x1 / delta)
        j0, j1 = math.floor(domain.y0 / delta), math.ceil(domain.y1 / delta)
        sites = tuple(
            (i, j)
            for i in range(i0, i1 + 1)
            for j in range(j0, j1 + 1)
            if domain.contains((i * delta, j * delta))
        )
        return cls(sites, beta=beta)

    @property
    def n_sites(self) -> int:
        return len(self.interior)

    def site_index(self, site) -> int:
        return self.interior.index((int(site[0]), int(site[1])))

    def boundary(self) -> tuple[tuple[int, int], ...]:
        inner = set(self.interior)
        hull = set()
        for (i, j) in self.interior:
            for di, dj in _NEIGHBOR_STEPS:
                if (i + di, j + dj) not in inner:
                    hull.add((i + di, j + dj))
        return tuple(sorted(hull))

    def _bonds_and_boundary_counts(self):
        inner = {s: k for k, s in enumerate(self.interior)}
        bonds = []
        bcount = np.zeros(self.n_sites)
        for (i, j), k in inner.items():
            for di, dj in _NEIGHBOR_STEPS:
                nb = (i + di, j + dj)
                if nb in inner:
                    if inner[nb] > k:
                        bonds.append((k, inner[nb]))
                else:
                    bcount[k] += 1.0
        return bonds, bcount

    def _spin_table(self):
        """(weights, spins) over all 2^n configurations, cached.

        spins[c, k] = +-1 with bit k of c equal to 0 mapping to +1, so that
        prod_{k in I} spins[c, k] = (-1)^{popcount(c & I)} and correlations
        for all subsets come out of one Walsh-Hadamard transform.
        """
        if "table" in self._cache:
            return self._cache["table"]
        n = self.n_sites
        bonds, bcount = self._bonds_and_boundary_counts()
        size = 1 << n
        weights = np.empty(size)
        chunk = min(size, 1 << 16)
        bits = np.arange(n)
        for start in range(0, size, chunk):
            c = np.arange(start, min(start + chunk, size), dtype=np.int64)
            s = 1.0 - 2.0 * ((c[:, None] >> bits) & 1)
            energy = s @ bcount
            for a, b in bonds:
                energy += s[:, a] * s[:, b]
            weights[start : start + c.size] = np.exp(self.beta * energy)
        self._cache["table"] = weights
        return weights

    def _all_correlations(self) -> np.ndarray:
        """E+[sigma^I] for every subset mask I, via fast Walsh-Hadamard."""
        if "corr" in self._cache:
            return self._cache["corr"]
        v = self._spin_table().copy()
        h = 1
        while h < v.size:
            v = v.reshape(-1, 2 * h)
            left = v[:, :h].copy()
            v[:, :h] = left + v[:, h:]
            v[:, h:] = left - v[:, h:]
            v = v.ravel()
            h *= 2
        corr = v / v[0]
        self._cache["corr"] = corr
        return corr


def correlation(system: LatticeSpinSystem, sites) -> float:
    """E+[prod_{x in I} sigma_x] by exact enumeration; I = [] gives 1."""
    sites = list(sites)
    if not sites:
        return 1.0
    mask = 0
    for s in sites:
        mask |= 1 << system.site_index(s)
    return float(system._all_correlations()[mask])


def rfim_partition_xi(system: LatticeSpinSystem, xi) -> float:
    """E+[exp(sum_x xi_x sigma_x)] for a per-site field vector xi."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (system.n_sites,):
        raise InputError("xi must have one entry per interior site")
    weights = system._spin_table()
    n = system.n_sites
    size = 1 << n
    bits = np.arange(n)
    total = 0.0
    norm = 0.0
    chunk = min(size, 1 << 16)
    for start in range(0, size, chunk):
        c = np.arange(start, min(start + chunk, size), dtype=np.int64)
        s = 1.0 - 2.0 * ((c[:, None] >> bits) & 1)
        w = weights[start : start + c.size]
        total += float(w @ np.exp(s @ xi))
        norm += float(w.sum())
    return total / norm


@dataclass(frozen=True)
class FieldProfiles:
    """Continuum disorder-strength and bias profiles on a rectangle domain."""

    lam_hat: object
    h_hat: object
    domain: Rect
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise InputError("delta must be positive")

    def _eval(self, f, p) -> float:
        if np.isscalar(f):
            return float(f)
        return float(f(p[0], p[1]))

    def lam_at(self, p) -> float:
        v = self._eval(self.lam_hat, p)
        if v <= 0:
            raise InputError("lam_hat must be strictly positive")
        return v

    def h_at(self, p) -> float:
        return self._eval(self.h_hat, p)


def scale_fields(profiles: FieldProfiles, system: LatticeSpinSystem):
    """Site maps lambda_x = lam_hat(x) delta^{7/8}, h_x = h_hat(x) delta^{15/8}."""
    d = profiles.delta
    lam = np.empty(system.n_sites)
    h = np.empty(system.n_sites)
    for k, (i, j) in enumerate(system.interior):
        p = (i * d, j * d)
        lam[k] = profiles.lam_at(p) * d ** (7.0 / 8.0)
        h[k] = profiles.h_at(p) * d ** (15.0 / 8.0)
    return lam, h


def rfim_partition(system: LatticeSpinSystem, omega, profiles: FieldProfiles) -> float:
    """Partition function of the random-field model at the scaled couplings."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (system.n_sites,):
        raise InputError("omega must have one entry per interior site")
    lam, h = scale_fields(profiles, system)
    return rfim_partition_xi(system, lam * omega + h)


def chaos_rewrite(system: LatticeSpinSystem, xi) -> tuple[float, Kernel]:
    """(prod_x cosh(xi_x), kernel I -> E+[sigma^I]).

    Evaluating the kernel at tanh(xi) and multiplying by the prefactor
    reconstructs rfim_partition_xi exactly.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (system.n_sites,):
        raise InputError("xi must have one entry per interior site")
    n = system.n_sites
    if n > 12:
        raise ResourceError("exhaustive chaos kernel is limited to 12 interior spins")
    corr = system._all_correlations()
    entries = {}
    for mask in range(1 << n):
        sites = tuple(k for k in range(n) if mask >> k & 1)
        entries[sites] = float(corr[mask])
    prefactor = float(np.prod(np.cosh(xi)))
    return prefactor, Kernel(entries)


def normalization_prefactor(profiles: FieldProfiles) -> float:
    """exp(-||lam_hat||^2_{L2(Omega)} delta^{-1/4} / 2), midpoint quadrature."""
    d, dom = profiles.delta, profiles.domain
    nx = max(1, round((dom.x1 - dom.x0) / d))
    ny = max(1, round((dom.y1 - dom.y0) / d))
    xs = dom.x0 + (np.arange(nx) + 0.5) * (dom.x1 - dom.x0) / nx
    ys = dom.y0 + (np.arange(ny) + 0.5) * (dom.y1 - dom.y0) / ny
    cell = ((dom.x1 - dom.x0) / nx) * ((dom.y1 - dom.y0) / ny)
    norm_sq = sum(profiles.lam_at((x, y)) ** 2 for x in xs for y in ys) * cell
    return math.exp(-0.5 * norm_sq * profiles.delta ** (-0.25))


def gks_decoupling_check(system: LatticeSpinSystem, subdomains):
    """Verify 0 <= E+[prod sigma_{x_i}] <= prod_i E+_{Omega_i}[sigma_{x_i}].

    ``subdomains`` is a sequence of (interior_sites, marked_site) pairs whose
    closures Omega_i cup boundary(Omega_i) must be pairwise disjoint subsets
    of the system.
    """
    closures = []
    marked = []
    inner = set(system.interior)
    for sites, x in subdomains:
        sub = LatticeSpinSystem(tuple(sites), beta=system.beta)
        if not set(sub.interior) <= inner:
            raise InputError("subdomain is not contained in the system")
        if (int(x[0]), int(x[1])) not in set(sub.interior):
            raise InputError("marked site must lie in its subdomain")
        closures.append(set(sub.interior) | set(sub.boundary()))
        marked.append((sub, (int(x[0]), int(x[1]))))
    for a in range(len(closures)):
        for b in range(a + 1, len(closures)):
            if closures[a] & closures[b]:
                raise InputError("subdomain closures overlap")
    lhs = correlation(system, [x for _, x in marked])
    rhs = 1.0
    for sub, x in marked:
        rhs *= correlation(sub, [x])
    holds = (-1e-12 <= lhs) and (lhs <= rhs + 1e-12)
    return lhs, rhs, holds


# ---------------------------------------------------------------------------
# continuum singular product f_Omega
# ---------------------------------------------------------------------------


def f_omega(points, domain: Rect) -> float:
    """prod_i d(x_i, boundary(Omega) cup I \\ {x_i})^{-1/8}."""
    pts = [np.asarray(p, dtype=float) for p in points]
    for p in pts:
        if not domain.contains(p):
            raise InputError(f"point {tuple(p)} outside the open domain")
    value = 1.0
    for i, p in enumerate(pts):
        d = domain.boundary_distance(p)
        for j, q in enumerate(pts):
            if j != i:
                d = min(d, float(np.hypot(*(p - q))))
        if d <= 0.0:
            raise DomainError("f_Omega diverges on coincident points")
        value *= d ** (-0.125)
    return value


def _f_omega_sq_batch(samples: np.ndarray, domain: Rect) -> np.ndarray:
    """f_Omega(x_1..x_n)^2 for a batch of point tuples, shape (m, n, 2)."""
    m, n, _ = samples.shape
    d_bnd = np.minimum.reduce(
        [
            samples[:, :, 0] - domain.x0,
            domain.x1 - samples[:, :, 0],
            samples[:, :, 1] - domain.y0,
            domain.y1 - samples[:, :, 1],
        ]
    )
    if n > 1:
        diff = samples[:, :, None, :] - samples[:, None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        dist[:, np.arange(n), np.arange(n)] = np.inf
        d_bnd = np.minimum(d_bnd, dist.min(axis=2))
    return np.prod(d_bnd ** (-0.25), axis=1)


@dataclass(frozen=True)
class L2RatioEstimate:
    ratio: float
    se: float
    numerator: float
    numerator_se: float
    denominator: float
    denominator_se: float


def f_omega_l2_ratio(
    domain: Rect, n: int, mc_samples: int = 100_000, seed: int = 0
) -> L2RatioEstimate:
    """Monte-Carlo estimate of ||f||^2_{L2(Omega^n)} / ||f||^2_{L2(Omega^{n-1})}.

    Independent uniform samples for numerator and denominator; the standard
    error combines both by the ratio delta method.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    def norm_sq(m_points: int):
        if m_points == 0:
            return 1.0, 0.0
        pts = domain.sample_interior(rng, mc_samples * m_points).reshape(
            mc_samples, m_points, 2
        )
        vals = _f_omega_sq_batch(pts, domain) * domain.area**m_points
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(mc_samples))

    num, num_se = norm_sq(n)
    den, den_se = norm_sq(n - 1)
    ratio = num / den
    se = ratio * math.sqrt((num_se / num) ** 2 + (den_se / den) ** 2)
    return L2RatioEstimate(ratio, se, num, num_se, den, den_se)


def correlation_bound_constant(
    domain: Rect, delta: float, site_sets, beta: float = BETA_C
) -> float:
    """Fitted constant C with delta^{-n/8} E+[sigma^I] <= C^n f_Omega(I) on the
    tested family; reported, never asserted against any reference value."""
    system = LatticeSpinSystem.from_domain(domain, delta, beta=beta)
    best = 0.0
    for sites in site_sets:
        sites = [(int(a), int(b)) for a, b in sites]
        n = len(sites)
        corr = correlation(system, sites)
        pts = [(i * delta, j * delta) for i, j in sites]
        f_val = f_omega(pts, domain)
        if corr > 0:
            best = max(best, (delta ** (-n / 8.0) * corr / f_val) ** (1.0 / n))
    return best
