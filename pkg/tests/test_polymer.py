"""Tests for the (long-range) directed polymer model."""

import itertools
import math

import numpy as np
import pytest

from chaoslim import polymer
from chaoslim.chaos import Kernel, eval_multilinear
from chaoslim.dists import GAUSSIAN_DISORDER, RADEMACHER_DISORDER
from chaoslim.errors import ConditioningError, DomainError, InputError, NumericError
from chaoslim.polymer import (
    SpaceTimeField,
    StableDensity,
    WalkLaw,
    gnedenko_gap,
    overlap_weight,
    polymer_kernel_continuum,
    polymer_kernel_discrete,
    polymer_partition,
    polymer_second_moment_continuum,
    polymer_second_moment_exact,
    scale_beta,
    walk_pmf,
)

SIMPLE = WalkLaw.simple_symmetric()
LAZY = WalkLaw.from_pmf([-2, -1, 0, 1, 2], [0.1, 0.2, 0.4, 0.2, 0.1])


# ---------------------------------------------------------------------------
# walk pmf and stable density
# ---------------------------------------------------------------------------


def test_walk_pmf_simple_binomial():
    q2 = walk_pmf(SIMPLE, 2)
    assert q2.as_dict() == {-2: 0.25, 0: 0.5, 2: 0.25}
    assert walk_pmf(SIMPLE, 0).as_dict() == {0: 1.0}


def test_walk_pmf_normalization_and_lattice():
    for n in (1, 7, 50):
        q = walk_pmf(SIMPLE, n)
        assert q.probs.sum() == pytest.approx(1.0, abs=1e-12)
        for k, p in q.as_dict().items():
            assert (k - SIMPLE.residue * n) % SIMPLE.period == 0
    assert walk_pmf(SIMPLE, 5)[0] == 0.0  # off the step-5 parity lattice


def test_period_detection():
    assert SIMPLE.period == 2 and SIMPLE.residue == 1
    assert LAZY.period == 1
    three = WalkLaw.from_pmf([-3, 3], [0.5, 0.5])
    assert three.period == 6 and three.residue == 3


def test_walk_law_validation():
    with pytest.raises(InputError):
        WalkLaw.from_pmf([-1, 1], [0.4, 0.6])  # nonzero mean
    with pytest.raises(InputError):
        WalkLaw.from_pmf([-1, 1], [0.7, 0.7])


def test_heavy_tail_law_tails():
    law = WalkLaw.heavy_tail(1.5, 0.3, window=2000)
    assert law.probs.sum() == pytest.approx(1.0)
    assert abs(float(law.offsets @ law.probs)) < 1e-12
    n = np.arange(10, 1000)
    plus = np.array([law.probs[list(law.offsets).index(k)] for k in n])
    c_plus = plus * n**2.5
    assert np.max(np.abs(c_plus / c_plus[0] - 1.0)) < 1e-9  # exact power law
    # stored tail constant matches P(S > n) ~ C (1+gamma)/2 n^{-alpha} well
    # away from the window cutoff
    big = 50
    empirical = float(law.probs[law.offsets > big].sum())
    predicted = law.c_tail * (1 + law.gamma_skew) / 2 * big**-1.5
    assert empirical == pytest.approx(predicted, rel=0.05)


def test_stable_density_gaussian_case():
    g = StableDensity(2.0, sigma2=1.0)
    assert float(g.pdf(0.0)) == pytest.approx(1.0 / math.sqrt(2 * math.pi))
    assert float(g.pdf_scaled(4.0, 0.0)) == pytest.approx(1.0 / math.sqrt(8 * math.pi))
    assert g.l2_norm_sq() == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)))


def test_stable_density_symmetry_and_normalization():
    from scipy.integrate import simpson

    g = StableDensity(1.5, gamma_skew=0.0, c_tail=1.0, quad_tol=1e-8)
    xs = np.linspace(0.25, 8.0, 32)
    assert np.max(np.abs(g.pdf(xs) - g.pdf(-xs))) < 1e-8
    # Simpson over |x| <= X plus the first-order tail C X^{-alpha}; the
    # neglected tail correction is O(X^{-2 alpha}) ~ 6e-8
    grid = np.linspace(-250.0, 250.0, 8001)
    mass = float(simpson(g.pdf(grid), x=grid)) + 1.0 * 250.0**-1.5
    assert abs(mass - 1.0) < 1e-6


def test_stable_density_against_scipy():
    from scipy.stats import levy_stable

    g = StableDensity(1.5, gamma_skew=0.3, c_tail=1.2)
    scale = g._scale_a ** (1.0 / 1.5)
    xs = np.array([-2.0, -0.5, 0.0, 0.7, 3.0])
    ref = levy_stable.pdf(xs, 1.5, 0.3, scale=scale)
    assert np.max(np.abs(g.pdf(xs) - ref)) < 1e-8


def test_stable_density_l2_norm_quadrature():
    from scipy.integrate import simpson

    g = StableDensity(1.4, gamma_skew=0.2, c_tail=0.9, quad_tol=1e-7)
    grid = np.linspace(-60.0, 60.0, 4001)
    quad = float(simpson(g.pdf(grid) ** 2, x=grid))
    assert quad == pytest.approx(g.l2_norm_sq(), rel=1e-4)


def test_stable_density_domain_errors():
    with pytest.raises(DomainError):
        StableDensity(2.0)
    with pytest.raises(DomainError):
        StableDensity(1.5)
    with pytest.raises(DomainError):
        StableDensity(0.9, c_tail=1.0)


# ---------------------------------------------------------------------------
# Gnedenko gap and coupling scale
# ---------------------------------------------------------------------------


def test_gnedenko_gap_n2_value():
    # the k = 0 term |sqrt(2)/2 - 2 g(0)| dominates at n = 2
    gap = gnedenko_gap(SIMPLE, 2)
    assert gap == pytest.approx(abs(math.sqrt(2) * 0.5 - 2.0 / math.sqrt(2 * math.pi)), rel=1e-10)
    assert gap == pytest.approx(0.0908, abs=2e-4)


def test_gnedenko_gap_decreases():
    gaps = [gnedenko_gap(SIMPLE, n) for n in (10, 100, 1000)]
    assert gaps[0] > gaps[1] > gaps[2] >= 0.0
    assert gaps[2] < 0.02


def test_gnedenko_gap_no_growth_on_doubling():
    for n in (8, 16, 32, 64):
        assert gnedenko_gap(SIMPLE, 2 * n) <= gnedenko_gap(SIMPLE, n) + 1e-6


def test_gnedenko_gap_heavy_tail_trend():
    law = WalkLaw.heavy_tail(1.5, 0.0, window=4000)
    gaps = [gnedenko_gap(law, n) for n in (4, 16, 64)]
    assert gaps[0] > gaps[1] > gaps[2] >= 0.0


def test_scale_beta_values():
    assert scale_beta(2.0, 3.0, 10_000) == pytest.approx(0.3)
    assert scale_beta(2.0, 3.0, 1) == pytest.approx(3.0)
    assert scale_beta(1.5, 3.0, 4096) == pytest.approx(3.0 / 4.0)
    with pytest.raises(DomainError):
        scale_beta(1.0, 1.0, 10)


# ---------------------------------------------------------------------------
# partition functions
# ---------------------------------------------------------------------------


def _brute_partition(law, field, beta, mode, y=None, disorder=GAUSSIAN_DISORDER):
    lam = disorder.log_mgf(beta)
    n = field.n_steps
    free = 0.0
    p2p = {}
    for incs in itertools.product(range(len(law.offsets)), repeat=n):
        prob, pos, energy = 1.0, 0, 0.0
        for step, i in enumerate(incs, start=1):
            prob *= law.probs[i]
            pos += int(law.offsets[i])
            energy += beta * field.values[step - 1, pos - field.k_lo] - lam
        w = prob * math.exp(energy)
        free += w
        p2p[pos] = p2p.get(pos, 0.0) + w
    if mode == "free":
        return free
    if mode == "point2point":
        return p2p.get(y, 0.0)
    return p2p.get(y, 0.0) / walk_pmf(law, n)[y]


def test_partition_zero_coupling():
    field = SpaceTimeField(np.zeros((12, 25)), -12)
    assert polymer_partition(SIMPLE, field, 0.0, "free") == pytest.approx(1.0)
    assert polymer_partition(SIMPLE, field, 0.0, "conditioned", 0) == pytest.approx(1.0)


@pytest.mark.parametrize("law", [SIMPLE, LAZY], ids=["simple", "window2"])
@pytest.mark.parametrize("mode,y", [("free", None), ("point2point", 2), ("conditioned", 0)])
def test_partition_matches_path_enumeration(law, mode, y):
    rng = np.random.default_rng(11)
    n = 6 if law is SIMPLE else 4
    width = 2 * n * int(law.offsets[-1]) + 1
    field = SpaceTimeField(rng.standard_normal((n, width)), -(width // 2))
    z = polymer_partition(law, field, 0.6, mode, y)
    oracle = _brute_partition(law, field, 0.6, mode, y)
    assert z == pytest.approx(oracle, rel=1e-12)


def test_partition_free_decomposes_over_endpoints():
    rng = np.random.default_rng(4)
    n = 10
    field = SpaceTimeField(rng.standard_normal((n, 2 * n + 1)), -n)
    q = walk_pmf(SIMPLE, n)
    free = polymer_partition(SIMPLE, field, 0.5, "free")
    total = sum(
        polymer_partition(SIMPLE, field, 0.5, "conditioned", y) * q[y]
        for y in range(-n, n + 1)
        if q[y] > 0
    )
    assert free == pytest.approx(total, rel=1e-12)


def test_partition_conditioning_error_off_lattice_endpoint():
    field = SpaceTimeField(np.zeros((4, 9)), -4)
    with pytest.raises(ConditioningError):
        polymer_partition(SIMPLE, field, 0.1, "conditioned", 1)  # parity violation


def test_partition_mass_loss_abort():
    field = SpaceTimeField(np.zeros((10, 3)), -1)  # window far too narrow
    with pytest.raises(NumericError):
        polymer_partition(SIMPLE, field, 0.1, "free", mass_tol=1e-8)


def test_normalization_exact_over_rademacher_disorder():
    n, width = 2, 5
    total = 0.0
    for bits in itertools.product([-1.0, 1.0], repeat=n * width):
        field = SpaceTimeField(np.array(bits).reshape(n, width), -2)
        total += polymer_partition(SIMPLE, field, 0.3, "free",
                                   disorder=RADEMACHER_DISORDER)
    assert total / 2 ** (n * width) == pytest.approx(1.0, abs=1e-12)


def test_chaos_rewrite_identity_small_system():
    """The partition function equals the exhaustive polynomial chaos sum with
    kernels from polymer_kernel_discrete and zeta = (site weight - 1)/a_N."""
    n = 4
    rng = np.random.default_rng(23)
    field = SpaceTimeField(rng.standard_normal((n, 2 * n + 1)), -n)
    beta = 0.37
    lam = GAUSSIAN_DISORDER.log_mgf(beta)
    a_n = n ** (-(SIMPLE.alpha - 1.0) / (2.0 * SIMPLE.alpha))
    scale = n ** (1.0 / SIMPLE.alpha)

    lattice = [(step, k) for step in range(1, n + 1) for k in range(-step, step + 1)
               if (k - step) % 2 == 0]
    endpoint_k = 0
    entries = {(): 1.0}
    site_index = {pt: i for i, pt in enumerate(lattice)}
    for r in range(1, len(lattice) + 1):
        for combo in itertools.combinations(lattice, r):
            if len({p[0] for p in combo}) != len(combo):
                continue  # same-time pairs carry zero kernel weight
            pts = [(step / n, k / scale) for step, k in combo]
            val = polymer_kernel_discrete(SIMPLE, n, pts, endpoint=(1.0, endpoint_k / scale))
            if val != 0.0:
                entries[tuple(sorted(site_index[p] for p in combo))] = val
    kernel = Kernel(entries)
    zeta = {
        site_index[(step, k)]: (math.exp(beta * field.values[step - 1, k - field.k_lo] - lam) - 1.0) / a_n
        for (step, k) in lattice
    }
    via_chaos = eval_multilinear(kernel, zeta)
    direct = polymer_partition(SIMPLE, field, beta, "conditioned", endpoint_k)
    assert via_chaos == pytest.approx(direct, rel=1e-10)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def test_kernel_discrete_examples():
    val = polymer_kernel_discrete(SIMPLE, 4, [(0.5, 0.0)], endpoint=(1.0, 0.0))
    a_n = 4.0 ** -0.25
    expected = a_n * walk_pmf(SIMPLE, 2)[0] ** 2 / walk_pmf(SIMPLE, 4)[0]
    assert val == pytest.approx(expected, rel=1e-12)
    assert polymer_kernel_discrete(SIMPLE, 4, [(0.5, 0.0), (0.5, 0.0)], endpoint=(1.0, 0.0)) == 0.0
    with pytest.raises(InputError):
        polymer_kernel_discrete(SIMPLE, 4, [(0.5, 0.33)], endpoint=(1.0, 0.0))


def test_kernel_discrete_converges_to_continuum():
    n = 4096
    scale = math.sqrt(n)

    def snap(step, x):
        k = round(x * scale)
        k -= (k - SIMPLE.residue * step) % SIMPLE.period
        return k / scale

    n1 = n // 4
    pts = [(n1 / n, snap(n1, 0.3))]
    end = (1.0, snap(n, 0.1))
    disc = polymer_kernel_discrete(SIMPLE, n, pts, endpoint=end)
    v_n = SIMPLE.period * n ** (-1.0 - 1.0 / SIMPLE.alpha)
    cont = polymer_kernel_continuum(SIMPLE.stable_density(), pts, endpoint=end,
                                    period=SIMPLE.period)
    assert abs(disc * v_n**-0.5 / cont - 1.0) < 0.05


def test_kernel_continuum_examples():
    g = StableDensity(2.0, sigma2=1.0)
    val = polymer_kernel_continuum(g, [(1.0, 0.0)], mode="free", period=2)
    assert val == pytest.approx(math.sqrt(2.0) / math.sqrt(2 * math.pi), rel=1e-12)
    # spatial reflection symmetry for gamma = 0
    g15 = StableDensity(1.5, gamma_skew=0.0, c_tail=1.0)
    pts = [(0.3, 0.4), (0.7, -0.2)]
    refl = [(t, -x) for t, x in pts]
    assert polymer_kernel_continuum(g15, pts, mode="free") == pytest.approx(
        polymer_kernel_continuum(g15, refl, mode="free"), rel=1e-9
    )
    with pytest.raises(DomainError):
        polymer_kernel_continuum(g, [(0.5, 0.0), (0.5, 1.0)], mode="free")


def test_kernel_l2_over_space_matches_quadrature():
    # p int g_t(x)^2 dx = p c_g t^{-1/alpha}
    g = StableDensity(2.0, sigma2=1.0)
    t = 0.7
    xs = np.linspace(-12, 12, 4001)
    vals = 2.0 * np.asarray(g.pdf_scaled(t, xs)) ** 2
    quad = float(np.trapezoid(vals, xs))
    assert quad == pytest.approx(2.0 * g.l2_norm_sq() * t**-0.5, rel=1e-8)


# ---------------------------------------------------------------------------
# second moments
# ---------------------------------------------------------------------------


def _brute_second_moment(law, n, beta):
    gamma = overlap_weight(beta)
    idx = np.asarray(list(itertools.product(range(len(law.offsets)), repeat=n)))
    positions = np.cumsum(np.asarray(law.offsets)[idx], axis=1)
    path_probs = np.prod(np.asarray(law.probs)[idx], axis=1)
    hits = (positions[:, None, :] == positions[None, :, :]).sum(axis=2)
    return float(path_probs @ np.exp(gamma * hits) @ path_probs)


def test_second_moment_zero_coupling():
    assert polymer_second_moment_exact(SIMPLE, 20, 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("law,n", [(SIMPLE, 4), (SIMPLE, 6), (LAZY, 4)],
                         ids=["simple4", "simple6", "window2"])
def test_second_moment_matches_pair_enumeration(law, n):
    dp = polymer_second_moment_exact(law, n, 0.8)
    brute = _brute_second_moment(law, n, 0.8)
    assert dp == pytest.approx(brute, rel=1e-10)


def test_second_moment_monotone_in_beta():
    values = [polymer_second_moment_exact(SIMPLE, 40, b) for b in np.linspace(0.0, 0.6, 7)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_second_moment_continuum_values():
    g = StableDensity(2.0, sigma2=1.0)
    assert polymer_second_moment_continuum(g, 0.0) == 1.0
    assert g.l2_norm_sq() == pytest.approx(0.28209, abs=1e-5)


def test_second_moment_converges():
    target = polymer_second_moment_continuum(SIMPLE.stable_density(), 0.5, 1.0,
                                             period=SIMPLE.period)
    gaps = []
    for n in (500, 1000, 2000):
        beta_n = scale_beta(2.0, 0.5, n)
        m2 = polymer_second_moment_exact(SIMPLE, n, beta_n)
        gaps.append(abs(m2 / target - 1.0))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 0.05


def test_second_moment_converges_heavy_tail():
    # alpha < 2: collisions of the difference walk against the Dirichlet
    # series with c_g from the stable-density L2 closed form; mass leaving
    # the window is absorbed with collision-free weight 1
    law = WalkLaw.heavy_tail(1.5, 0.0, window=3000)
    target = polymer_second_moment_continuum(law.stable_density(), 0.4, 1.0,
                                             period=law.period)
    gaps = []
    for n in (50, 100, 200):
        beta_n = scale_beta(1.5, 0.4, n)
        m2 = polymer_second_moment_exact(law, n, beta_n, window=30_000, mass_tol=1.0)
        gaps.append(abs(m2 / target - 1.0))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 0.01


def test_second_moment_heavy_tail_skewed():
    law = WalkLaw.heavy_tail(1.4, 0.5, window=3000)
    target = polymer_second_moment_continuum(law.stable_density(), 0.4, 1.0,
                                             period=law.period)
    beta_n = scale_beta(1.4, 0.4, 200)
    m2 = polymer_second_moment_exact(law, 200, beta_n, window=30_000, mass_tol=1.0)
    assert abs(m2 / target - 1.0) < 0.05


def test_second_moment_series_divergence_reported():
    g = StableDensity(2.0, sigma2=1.0)
    with pytest.raises(NumericError):
        polymer_second_moment_continuum(g, 40.0, k_max=10, period=2)


from hypothesis import given, strategies as st


@given(
    st.lists(st.floats(0.05, 1.0), min_size=2, max_size=3),
    st.floats(0.0, 0.8),
)
def test_second_moment_random_walks_match_enumeration(raw, beta):
    # symmetric zero-mean laws on {-m..m} built from random half-weights
    half = np.asarray(raw)
    m = half.size
    probs = np.concatenate([half[::-1], [2.0 * half.sum()], half])
    probs /= probs.sum()
    law = WalkLaw.from_pmf(np.arange(-m, m + 1), probs)
    dp = polymer_second_moment_exact(law, 4, beta)
    brute = _brute_second_moment(law, 4, beta)
    assert dp == pytest.approx(brute, rel=1e-10)
