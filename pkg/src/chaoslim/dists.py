"""Small probability-law helpers shared by the chaos, tilting and model modules.

Everything here is either an exact finite atom list or a closed-form law, so
that expectations used in bounds and oracles are exact finite sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

_ATOL = 1e-12


@dataclass(frozen=True)
class Atoms:
    """Discrete law given by atoms ``values`` with probabilities ``probs``."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if v.ndim != 1 or p.shape != v.shape:
            raise InputError("values and probs must be 1-d arrays of equal length")
        if np.any(p < -_ATOL):
            raise InputError("negative probability")
        if abs(p.sum() - 1.0) > 1e-9:
            raise InputError(f"probabilities sum to {p.sum()!r}, not 1")
        order = np.argsort(v)
        object.__setattr__(self, "values", v[order])
        object.__setattr__(self, "probs", np.clip(p[order], 0.0, None))

    @classmethod
    def from_samples(cls, samples) -> "Atoms":
        """Collapse an empirical sample to a weighted atom list."""
        x = np.asarray(samples, dtype=float).ravel()
        vals, counts = np.unique(x, return_counts=True)
        return cls(vals, counts / counts.sum())

    def mean(self) -> float:
        return float(self.values @ self.probs)

    def second_moment(self) -> float:
        return float((self.values**2) @ self.probs)

    def var(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def expect(self, f) -> float:
        return float(f(self.values) @ self.probs)

    def m2_above(self, m: float) -> float:
        """E[X^2 1_{|X| > m}], exact."""
        mask = np.abs(self.values) > m
        return float((self.values[mask] ** 2) @ self.probs[mask])

    def m3_below(self, m: float) -> float:
        """E[|X|^3 1_{|X| <= m}], exact."""
        mask = np.abs(self.values) <= m
        return float((np.abs(self.values[mask]) ** 3) @ self.probs[mask])

    def shifted(self, c: float) -> "Atoms":
        return Atoms(self.values + c, self.probs)

    def scaled(self, c: float) -> "Atoms":
        return Atoms(self.values * c, self.probs)

    def standardized(self) -> "Atoms":
        sd = math.sqrt(self.var())
        if sd == 0.0:
            raise InputError("degenerate law cannot be standardized")
        return Atoms((self.values - self.mean()) / sd, self.probs)

    def log_mgf(self, t: float) -> float:
        a = t * self.values + np.log(np.maximum(self.probs, 1e-300))
        amax = a.max()
        return float(amax + np.log(np.exp(a - amax).sum()))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.choice(self.values, size=size, p=self.probs / self.probs.sum())


RADEMACHER = Atoms(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))


class StdGaussian:
    """Standard normal with closed-form truncated moments."""

    def mean(self):
        return 0.0

    def var(self):
        return 1.0

    def m2_above(self, m: float) -> float:
        if not math.isfinite(m):
            return 0.0
        if m <= 0:
            return 1.0
        phi = math.exp(-0.5 * m * m) / math.sqrt(2 * math.pi)
        tail = 0.5 * math.erfc(m / math.sqrt(2))
        return 2.0 * (m * phi + tail)

    def m3_below(self, m: float) -> float:
        # 2 * int_0^m x^3 phi(x) dx = sqrt(2/pi) * (2 - (m^2+2) e^{-m^2/2})
        if not math.isfinite(m):
            return 2.0 * math.sqrt(2.0 / math.pi)
        if m <= 0:
            return 0.0
        return math.sqrt(2.0 / math.pi) * (2.0 - (m * m + 2.0) * math.exp(-0.5 * m * m))

    def log_mgf(self, t: float) -> float:
        return 0.5 * t * t

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.standard_normal(size)


@dataclass(frozen=True)
class DisorderLaw:
    """A zero-mean unit-variance disorder law with its cumulant Lambda(t).

    ``kind`` is one of ``gaussian``, ``rademacher``, ``atoms``; the cumulant
    is closed-form for the first two and an exact finite sum for atom laws.
    """

    kind: str = "gaussian"
    atoms: Atoms | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "rademacher", "atoms"):
            raise InputError(f"unknown disorder kind {self.kind!r}")
        if self.kind == "atoms":
            if self.atoms is None:
                raise InputError("atom disorder needs an Atoms law")
            if abs(self.atoms.mean()) > 1e-9 or abs(self.atoms.var() - 1.0) > 1e-9:
                raise InputError("disorder atoms must have zero mean and unit variance")

    def log_mgf(self, t: float) -> float:
        if self.kind == "gaussian":
            return 0.5 * t * t
        if self.kind == "rademacher":
            # log cosh t, overflow-safe
            a = abs(t)
            return a + math.log1p(math.exp(-2 * a)) - math.log(2.0)
        return self.atoms.log_mgf(t)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "rademacher":
            return rng.choice(np.array([-1.0, 1.0]), size=size)
        return self.atoms.sample(rng, size)


GAUSSIAN_DISORDER = DisorderLaw("gaussian")
RADEMACHER_DISORDER = DisorderLaw("rademacher")


@dataclass(frozen=True)
class VariableFamily:
    """Independent variables zeta_i = mu_i + sigma * (centered base draw).

    The shared variance and the per-site means are what the mean-shift
    bound machinery consumes; ``base`` provides sampling and, when it is an
    atom law, exact per-site atom lists for tilting.
    """

    means: np.ndarray
    sigma2: float
    base: DisorderLaw = field(default=GAUSSIAN_DISORDER)

    def __post_init__(self):
        mu = np.asarray(self.means, dtype=float)
        if mu.ndim != 1:
            raise InputError("means must be a 1-d array")
        if self.sigma2 <= 0:
            raise InputError("shared variance must be positive")
        object.__setattr__(self, "means", mu)

    @property
    def n_sites(self) -> int:
        return self.means.size

    def c_mu(self) -> float:
        """Sum of squared means (finite by construction)."""
        return float(self.means @ self.means)

    def site_atoms(self, i: int) -> Atoms:
        if self.base.kind == "rademacher":
            centered = RADEMACHER
        elif self.base.kind == "atoms":
            centered = self.base.atoms
        else:
            raise InputError("site_atoms requires a discrete base law")
        return centered.scaled(math.sqrt(self.sigma2)).shifted(float(self.means[i]))

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        shape = (self.n_sites,) if size is None else (size, self.n_sites)
        z = self.base.sample(rng, shape)
        return self.means + math.sqrt(self.sigma2) * z
