"""Sampler decoding of the closest-vector problem.

The pipeline: LLL-reduce, take a cheap initial estimate (nearest-plane on
the reduced basis by default), pick the sampling deviation from the initial
residual, and either return the initial point straight away -- when it lies
within the relaxed correct-decoding radius it is provably optimal -- or run
the Gibbs chain and keep the best candidate seen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dgauss import GaussianParams, box_states
from .errors import DomainError, SupportError
from .gibbs import ChainConfig, normalize_alphabet, run_chain
from .lattice import as_basis, babai_nearest_plane, zero_forcing
from .lll import DEFAULT_DELTA, lll_reduce

# Anti-stalling floor: below sigma = 1/sqrt(2 pi) the chain freezes.
SIGMA_FLOOR = 1.0 / math.sqrt(2.0 * math.pi)

INITIAL_DETECTORS = ("zf", "sic", "sic-lll")


@dataclass(frozen=True)
class SigmaStrategy:
    """How to pick the sampling standard deviation.

    kind is one of "distance" (from the initial residual), "statistic"
    (from the noise deviation sigma_w), "hassibi" (from SNR and dimension,
    falling back to statistic when out of domain), or "fixed".
    """

    kind: str
    value: float | None = None
    sigma_w: float | None = None
    snr: float | None = None
    n: int | None = None

    def __post_init__(self):
        if self.kind not in ("distance", "statistic", "hassibi", "fixed"):
            raise DomainError(f"unknown sigma strategy {self.kind!r}")


@dataclass(frozen=True)
class DecodeOutcome:
    """Result of one decode: the estimate, its residual distance, and how
    it was produced."""

    estimate: np.ndarray
    residual: float
    sampler_invoked: bool
    sweeps_used: int
    method: str
    sigma: float = field(default=float("nan"))
    sigma_fallback: bool = False


def sigma_from_residual(residual: float, n: int) -> float:
    """The deviation maximizing the sampling-probability lower bound for a
    point at the given distance: max(residual / sqrt(n), floor)."""
    return max(float(residual) / math.sqrt(n), SIGMA_FLOOR)


def sigma_distance(reduced_basis, z0, target) -> float:
    """Distance-adaptive deviation from the initial point's residual."""
    reduced_basis = as_basis(reduced_basis)
    r = float(np.linalg.norm(reduced_basis.embed(z0) - np.asarray(target, float)))
    return sigma_from_residual(r, reduced_basis.n)


def sigma_statistic(sigma_w: float) -> float:
    """Statistical deviation: the noise level, floored against stalling."""
    if sigma_w < 0:
        raise DomainError(f"sigma_w must be >= 0, got {sigma_w}")
    return max(float(sigma_w), SIGMA_FLOOR)


def sigma_hassibi(snr: float, n: int) -> float:
    """Hassibi's SNR-scaled deviation; requires SNR / ln(n) >= 2."""
    a = snr / math.log(n)
    rad = a * a - 2.0 * a
    if rad < 0:
        raise DomainError(f"SNR/ln(n) = {a:.4f} < 2: deviation undefined")
    return math.sqrt(a + math.sqrt(rad))


def resolve_sigma(strategy: SigmaStrategy, residual: float, n: int):
    """Evaluate a strategy for one decode. Returns (sigma, fallback_flag);
    the flag marks a hassibi domain failure resolved by the statistic rule."""
    if strategy.kind == "distance":
        return sigma_from_residual(residual, n), False
    if strategy.kind == "statistic":
        if strategy.sigma_w is None:
            raise DomainError("statistic strategy needs sigma_w")
        return sigma_statistic(strategy.sigma_w), False
    if strategy.kind == "hassibi":
        if strategy.snr is None:
            raise DomainError("hassibi strategy needs snr")
        try:
            return sigma_hassibi(strategy.snr, strategy.n or n), False
        except DomainError:
            return sigma_statistic(strategy.sigma_w or 0.0), True
    if strategy.value is None or strategy.value <= 0:
        raise DomainError("fixed strategy needs a positive value")
    return float(strategy.value), False


def correct_radius(reduced_basis) -> float:
    """Correct decoding radius of nearest-plane: half the shortest
    Gram-Schmidt norm. Any lattice point within it is the unique CVP."""
    return 0.5 * as_basis(reduced_basis).min_gs_norm


def startup_decide(reduced_basis, z0, target, alpha: float = 1.0) -> bool:
    """True when the initial point already lies within alpha times the
    correct decoding radius, so the sampler can be skipped. At alpha = 1
    the skipped answer is guaranteed optimal."""
    reduced_basis = as_basis(reduced_basis)
    if alpha < 1.0:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    r = float(np.linalg.norm(reduced_basis.embed(z0) - np.asarray(target, float)))
    return r <= alpha * correct_radius(reduced_basis)


def cvp_complexity(pmf_cvp: float, t_mix: int) -> float:
    """Markov moves per returned CVP solution: t_mix / pmf of the target."""
    if not 0.0 < pmf_cvp <= 1.0:
        raise DomainError(f"pmf_cvp must lie in (0, 1], got {pmf_cvp}")
    return float(t_mix) / float(pmf_cvp)


def sampling_lower_bound(residual: float, sigma: float, n: int) -> float:
    """The sigma-dependent factor of the sampling-probability lower bound:
    exp(-r^2 / (2 sigma^2)) / (sqrt(2 pi) sigma)^n, valid for sigma above
    the floor. Maximized at sigma = r / sqrt(n)."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    return math.exp(-(residual**2) / (2.0 * sigma * sigma)) / (
        math.sqrt(2.0 * math.pi) * sigma
    ) ** n


def gaussian_mass_constant(basis, box) -> float:
    """The constant completing the lower bound: the reciprocal Gaussian
    mass sum_z exp(-pi ||B z||^2), enumerated over the box."""
    basis = as_basis(basis)
    states = box_states(box)
    emb = states.astype(float) @ basis.columns.T
    return 1.0 / float(np.exp(-np.pi * np.einsum("ij,ij->i", emb, emb)).sum())


def clamp_to_alphabet(coords, support) -> np.ndarray:
    """Componentwise nearest alphabet value (sorted supports)."""
    coords = np.asarray(coords, dtype=np.int64)
    out = np.empty_like(coords)
    for i, a in enumerate(support):
        j = int(np.searchsorted(a, coords[i]))
        cand = [a[max(j - 1, 0)], a[min(j, len(a) - 1)]]
        out[i] = min(cand, key=lambda v: abs(int(v) - int(coords[i])))
    return out


def sampler_decode(
    basis,
    target,
    sweeps: int,
    strategy: SigmaStrategy,
    alpha: float | None = 1.0,
    mode: str = "lattice",
    seed=None,
    alphabet=None,
    initial: str = "sic-lll",
    delta: float = DEFAULT_DELTA,
) -> DecodeOutcome:
    """Decode one target vector by Gibbs sampling with a startup gate.

    mode "lattice" searches all integer vectors, mixing in the reduced
    parameterization and mapping back; mode "finite-alphabet" restricts
    every coordinate to the given alphabet and keeps reduction out of the
    mixing (it only supplies the initial point and the gate radius).
    alpha=None disables the gate. The candidate pool is the initial point
    plus every end-of-sweep state; the best residual wins, ties keeping the
    earlier candidate.
    """
    basis = as_basis(basis)
    c = np.asarray(target, dtype=float)
    if initial not in INITIAL_DETECTORS:
        raise DomainError(f"initial must be one of {INITIAL_DETECTORS}")
    if mode not in ("lattice", "finite-alphabet"):
        raise DomainError(f"unknown mode {mode!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    need_lll = (
        mode == "lattice"
        or initial == "sic-lll"
        or alpha is not None
        or strategy.kind == "distance"
    )
    red = lll_reduce(basis, delta) if need_lll else None

    if mode == "lattice":
        if alphabet is not None:
            raise SupportError("lattice mode does not take an alphabet")
        z_ref = babai_nearest_plane(red.reduced, c)
        if initial == "sic-lll":
            z0 = z_ref
        elif initial == "sic":
            z0 = red.to_reduced_coords(babai_nearest_plane(basis, c))
        else:
            z0 = red.to_reduced_coords(zero_forcing(basis, c))
        start = z0
        ref = z_ref
        chain_basis = red.reduced
        support = None
        to_original = red.to_original_coords
    else:
        support = normalize_alphabet(alphabet, basis.n)
        raw_ref = None
        if strategy.kind == "distance" or initial == "sic-lll":
            raw_ref = clamp_to_alphabet(
                red.to_original_coords(babai_nearest_plane(red.reduced, c)), support
            )
        if initial == "sic-lll":
            raw = raw_ref
        elif initial == "sic":
            raw = babai_nearest_plane(basis, c)
        else:
            raw = zero_forcing(basis, c)
        start = clamp_to_alphabet(raw, support)
        ref = raw_ref if raw_ref is not None else start
        chain_basis = basis
        to_original = lambda z: z  # noqa: E731 - chain runs in x-coordinates

    residual0 = float(np.linalg.norm(chain_basis.embed(start) - c))
    # The distance rule takes the nearest-plane-on-reduced-basis residual as
    # its distance estimate whatever point starts the chain; a wrong start
    # would otherwise inflate sigma and overheat the mixing.
    residual_ref = float(np.linalg.norm(chain_basis.embed(ref) - c))
    sigma, fallback = resolve_sigma(strategy, residual_ref, basis.n)

    if alpha is not None and residual0 <= alpha * correct_radius(red.reduced):
        return DecodeOutcome(
            estimate=to_original(start),
            residual=residual0,
            sampler_invoked=False,
            sweeps_used=0,
            method=initial,
            sigma=sigma,
            sigma_fallback=fallback,
        )

    cfg = ChainConfig(
        params=GaussianParams(basis=chain_basis, sigma=sigma, center=c),
        sweeps=sweeps,
        support=support,
    )
    best, best_r = start, residual0
    for state in run_chain(cfg, start, rng):
        r = float(np.linalg.norm(chain_basis.embed(state.coords) - c))
        if r < best_r:
            best, best_r = state.coords, r
    return DecodeOutcome(
        estimate=to_original(best),
        residual=best_r,
        sampler_invoked=True,
        sweeps_used=sweeps,
        method=f"gibbs-{initial}",
        sigma=sigma,
        sigma_fallback=fallback,
    )
