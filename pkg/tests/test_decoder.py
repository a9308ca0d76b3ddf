import math

import numpy as np
import pytest

from latgibbs import (
    SIGMA_FLOOR,
    Basis,
    DomainError,
    GaussianParams,
    SigmaStrategy,
    correct_radius,
    cvp_complexity,
    lattice_pmf_exact,
    sampler_decode,
    sigma_distance,
    sigma_hassibi,
    sigma_statistic,
    startup_decide,
)
from latgibbs.decoder import (
    clamp_to_alphabet,
    gaussian_mass_constant,
    resolve_sigma,
    sampling_lower_bound,
    sigma_from_residual,
)
from latgibbs.dgauss import default_box, pmf_on_box
from latgibbs.diagnostics import enumerate_cvp, shortest_vector
from latgibbs.lattice import babai_nearest_plane
from latgibbs.lll import lll_reduce

from conftest import random_basis


def test_sigma_distance_floor_branch():
    basis = Basis(np.eye(2))
    z0 = np.array([1, -2])
    assert sigma_distance(basis, z0, basis.embed(z0)) == pytest.approx(SIGMA_FLOOR)
    assert SIGMA_FLOOR == pytest.approx(0.3989422804014327)


def test_sigma_distance_scales_with_residual():
    assert sigma_from_residual(10.0, 4) == pytest.approx(5.0)
    basis = Basis(np.eye(4))
    z0 = np.zeros(4, dtype=np.int64)
    c = np.array([10.0, 0.0, 0.0, 0.0])
    assert sigma_distance(basis, z0, c) == pytest.approx(5.0)


def test_sigma_distance_maximizes_lower_bound(rng):
    # grid-search oracle over the sigma-dependent bound factor
    for _ in range(10):
        n = int(rng.integers(2, 6))
        residual = float(rng.uniform(2.0, 12.0))
        grid = np.arange(SIGMA_FLOOR, 10.0, 0.01)
        vals = [sampling_lower_bound(residual, s, n) for s in grid]
        best = grid[int(np.argmax(vals))]
        expect = sigma_from_residual(residual, n)
        if expect > SIGMA_FLOOR and expect < 10.0:
            assert abs(best - expect) <= 0.01 + 1e-9


def test_sigma_distance_monotone_in_residual():
    values = [sigma_from_residual(r, 4) for r in np.linspace(0.0, 20.0, 200)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[0] == pytest.approx(SIGMA_FLOOR)


def test_sigma_statistic_branches():
    assert sigma_statistic(2.0) == pytest.approx(2.0)
    assert sigma_statistic(0.1) == pytest.approx(SIGMA_FLOOR)
    assert sigma_statistic(SIGMA_FLOOR) == pytest.approx(SIGMA_FLOOR)


def test_sigma_hassibi_values():
    # radicand-zero boundary: snr / ln(n) = 2
    n = 16
    assert sigma_hassibi(2.0 * math.log(n), n) == pytest.approx(math.sqrt(2.0))
    # direct evaluation at SNR=10, n=16
    a = 10.0 / math.log(16)
    expect2 = a + math.sqrt(a * a - 2 * a)
    assert expect2 == pytest.approx(6.0139, abs=2e-4)
    assert sigma_hassibi(10.0, 16) == pytest.approx(math.sqrt(expect2))
    assert sigma_hassibi(10.0, 16) == pytest.approx(2.4523, abs=1e-4)


def test_sigma_hassibi_domain_error_and_fallback():
    with pytest.raises(DomainError):
        sigma_hassibi(math.log(16), 16)  # snr/ln(n) = 1
    strat = SigmaStrategy(kind="hassibi", snr=math.log(16), n=16, sigma_w=2.5)
    sigma, flagged = resolve_sigma(strat, residual=1.0, n=16)
    assert flagged
    assert sigma == pytest.approx(2.5)


def test_correct_radius_identity_and_scaling(rng):
    assert correct_radius(Basis(np.eye(3))) == pytest.approx(0.5)
    basis = random_basis(rng, 4)
    s = 3.7
    assert correct_radius(Basis(s * basis.columns)) == pytest.approx(
        s * correct_radius(basis), rel=1e-12
    )


def test_correct_radius_lambda1_lower_bound(rng):
    # R >= lambda_1 / (2 sqrt(n) beta^{(n-1)/4}) with beta = 2 at delta = 3/4
    for _ in range(20):
        basis = random_basis(rng, 4, min_det=1e-2)
        red = lll_reduce(basis, 0.75).reduced
        lam1 = shortest_vector(basis)
        n = 4
        assert correct_radius(red) >= lam1 / (2 * math.sqrt(n) * 2 ** ((n - 1) / 4)) - 1e-12


def test_startup_decide_zero_residual():
    basis = Basis(np.array([[1.0, 0.2], [0.0, 1.0]]))
    z0 = np.array([3, -1])
    c = basis.embed(z0)
    for alpha in (1.0, 1.5, 4.0):
        assert startup_decide(basis, z0, c, alpha)


def test_startup_decide_relaxation():
    basis = Basis(np.eye(2))
    z0 = np.zeros(2, dtype=np.int64)
    c = np.array([0.6 * basis.min_gs_norm, 0.0])
    assert not startup_decide(basis, z0, c, 1.0)
    assert startup_decide(basis, z0, c, 2.0)
    with pytest.raises(DomainError):
        startup_decide(basis, z0, c, 0.5)


def test_startup_sound_at_alpha_one(rng):
    # whenever the gate fires at alpha=1, the point is the exact CVP
    fired = 0
    while fired < 80:
        basis = random_basis(rng, 4, min_det=1e-2)
        red = lll_reduce(basis).reduced
        z_star = rng.integers(-4, 5, 4)
        w = rng.standard_normal(4)
        dist = rng.uniform(0.0, 1.2) * correct_radius(red)
        c = red.embed(z_star) + dist * w / np.linalg.norm(w)
        z0 = babai_nearest_plane(red, c)
        if startup_decide(red, z0, c, 1.0):
            fired += 1
            assert np.array_equal(z0, enumerate_cvp(red, c))


def test_decode_noiseless_skips_sampler(rng):
    basis = random_basis(rng, 4)
    x0 = rng.integers(-3, 4, 4)
    out = sampler_decode(
        basis, basis.embed(x0), sweeps=50, strategy=SigmaStrategy(kind="distance"), seed=0
    )
    assert not out.sampler_invoked
    assert out.sweeps_used == 0
    assert np.array_equal(out.estimate, x0)
    assert out.residual == pytest.approx(0.0, abs=1e-9)


def test_decode_residual_never_worse_than_initial(rng):
    for trial in range(25):
        basis = random_basis(rng, 4, min_det=1e-2)
        x_star = rng.integers(-3, 4, 4)
        c = basis.embed(x_star) + 0.6 * rng.standard_normal(4)
        red = lll_reduce(basis)
        z0 = babai_nearest_plane(red.reduced, c)
        initial_residual = np.linalg.norm(red.reduced.embed(z0) - c)
        out = sampler_decode(
            basis,
            c,
            sweeps=50,
            strategy=SigmaStrategy(kind="distance"),
            alpha=None,
            seed=trial,
        )
        assert out.sampler_invoked
        assert out.residual <= initial_residual + 1e-12
        assert np.linalg.norm(basis.embed(out.estimate) - c) == pytest.approx(
            out.residual, abs=1e-9
        )


def test_decode_matches_enumeration_near_radius(rng):
    hits = 0
    trials = 150
    for trial in range(trials):
        basis = random_basis(rng, 4, min_det=1e-2)
        red = lll_reduce(basis).reduced
        x_star = rng.integers(-3, 4, 4)
        w = rng.standard_normal(4)
        c = basis.embed(x_star) + correct_radius(red) * w / np.linalg.norm(w)
        out = sampler_decode(
            basis, c, sweeps=200, strategy=SigmaStrategy(kind="distance"), seed=trial
        )
        hits += np.array_equal(out.estimate, enumerate_cvp(basis, c))
    assert hits >= 0.9 * trials


def test_decode_initial_detector_options(rng):
    basis = random_basis(rng, 3, min_det=1e-2)
    x_star = rng.integers(-2, 3, 3)
    c = basis.embed(x_star) + 0.05 * rng.standard_normal(3)
    for initial in ("zf", "sic", "sic-lll"):
        out = sampler_decode(
            basis, c, sweeps=10, strategy=SigmaStrategy(kind="fixed", value=1.0),
            seed=1, initial=initial,
        )
        assert out.method in (initial, f"gibbs-{initial}")
        assert np.array_equal(out.estimate, x_star)


def test_decode_finite_alphabet_mode(rng):
    basis = random_basis(rng, 4, min_det=1e-2)
    alphabet = np.arange(4)
    x_star = rng.integers(0, 4, 4)
    c = basis.embed(x_star) + 0.05 * rng.standard_normal(4)
    out = sampler_decode(
        basis,
        c,
        sweeps=30,
        strategy=SigmaStrategy(kind="distance"),
        mode="finite-alphabet",
        alphabet=alphabet,
        seed=5,
    )
    assert np.array_equal(out.estimate, x_star)
    assert set(out.estimate.tolist()) <= set(alphabet.tolist())


def test_cvp_complexity_examples():
    assert cvp_complexity(1.0, 1) == pytest.approx(1.0)
    assert cvp_complexity(0.25, 10) == pytest.approx(40.0)
    with pytest.raises(DomainError):
        cvp_complexity(0.0, 10)


def test_cvp_complexity_falls_with_smaller_sigma():
    basis = Basis(np.array([[1.0, 0.4], [0.0, 1.1]]))
    c = np.array([0.3, -0.4])
    x_cvp = tuple(enumerate_cvp(basis, c).tolist())
    complexities = []
    for sigma in (1.2, 0.6, 0.3):
        params = GaussianParams(basis=basis, sigma=sigma, center=c)
        pmf = lattice_pmf_exact(params, default_box(params))
        complexities.append(cvp_complexity(pmf[x_cvp], t_mix=10))
    assert complexities[0] > complexities[1] > complexities[2]


def test_pmf_lower_bound_function(rng):
    # exact truncated pmf dominates f(sigma) * c for sigma above the floor
    basis = Basis(np.array([[1.0, 0.6], [0.0, 0.9]]))
    red = lll_reduce(basis).reduced
    c = np.array([0.4, 0.2])
    mass_box = default_box(GaussianParams(basis=red, sigma=1.5, center=c))
    const = gaussian_mass_constant(red, mass_box)
    for sigma in (SIGMA_FLOOR, 0.7, 1.3):
        params = GaussianParams(basis=red, sigma=sigma, center=c)
        states, probs = pmf_on_box(params, mass_box, check_mass=False)
        emb = states.astype(float) @ red.columns.T - c
        residuals = np.linalg.norm(emb, axis=1)
        bound = np.array(
            [sampling_lower_bound(r, sigma, red.n) for r in residuals]
        ) * const
        assert (probs >= bound * (1 - 1e-9)).all()


def test_clamp_to_alphabet():
    support = (np.array([0, 1, 2, 3]), np.array([-2, 0, 2]))
    assert np.array_equal(clamp_to_alphabet([7, -5], support), [3, -2])
    assert np.array_equal(clamp_to_alphabet([1, 1], support), [1, 0])


def test_strategy_validation():
    with pytest.raises(DomainError):
        SigmaStrategy(kind="bogus")
    with pytest.raises(DomainError):
        resolve_sigma(SigmaStrategy(kind="fixed"), residual=1.0, n=2)
    with pytest.raises(DomainError):
        resolve_sigma(SigmaStrategy(kind="statistic"), residual=1.0, n=2)
