"""Systematic-scan Gibbs sampling over lattice Gaussian targets.

One Markov move is a full sweep updating coordinates in the fixed order
x_n, x_{n-1}, ..., x_1, each from its exact one-dimensional conditional.
The reduction-aided variant runs the same chain against the LLL-reduced
basis and maps samples back through the unimodular transform; the
finite-alphabet variant restricts every conditional to a per-coordinate
alphabet (used for MIMO detection, where reduction never enters the mixing).

Only the systematic scan is implemented: its fixed update order is what a
decoder wants, and random-scan mixing differs from it by at most a
polynomial factor anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgauss import Gaussian1D, GaussianParams, draw_conditional
from .errors import DomainError, SupportError
from .lattice import as_basis
from .lll import DEFAULT_DELTA, lll_reduce


@dataclass
class ChainState:
    """Snapshot of the chain: coordinates, completed sweeps, live RNG."""

    coords: np.ndarray
    sweep: int
    rng: np.random.Generator


@dataclass(frozen=True)
class ChainConfig:
    """Chain setup. support is None for all of Z^n, otherwise one sorted
    int array per coordinate. Samples are collected after each full sweep
    with index > collect_from."""

    params: GaussianParams
    sweeps: int
    support: tuple | None = None
    collect_from: int = 0

    def __post_init__(self):
        if self.sweeps < 0:
            raise DomainError(f"sweeps must be >= 0, got {self.sweeps}")
        if not 0 <= self.collect_from <= self.sweeps:
            raise DomainError(
                f"collect_from must lie in [0, sweeps], got {self.collect_from}"
            )
        if self.support is not None:
            n = self.params.basis.n
            sup = tuple(np.sort(np.asarray(a, dtype=np.int64)) for a in self.support)
            if len(sup) != n:
                raise SupportError(f"need {n} per-coordinate alphabets, got {len(sup)}")
            if any(a.size == 0 for a in sup):
                raise SupportError("empty alphabet")
            object.__setattr__(self, "support", sup)


def conditional_1d(params: GaussianParams, coords, i: int, support=None) -> Gaussian1D:
    """Exact conditional of coordinate i given the others.

    Completing the square in ||B x - c||^2 over x_i gives a discrete
    Gaussian with center <b_i, c - sum_{j != i} x_j b_j> / ||b_i||^2 and
    scale sigma / ||b_i||.
    """
    basis = params.basis
    b_i = basis.columns[:, i]
    sq = basis.col_norms[i] ** 2
    if sq == 0.0:
        raise DomainError(f"basis column {i} has zero norm")
    x = np.asarray(coords, dtype=float)
    rest = basis.columns @ x - x[i] * b_i
    center = (params.center - rest) @ b_i / sq
    return Gaussian1D(
        center=float(center), scale=params.sigma / basis.col_norms[i], support=support
    )


def _check_start(cfg: ChainConfig, x0):
    x0 = np.asarray(x0, dtype=np.int64)
    if x0.shape != (cfg.params.basis.n,):
        raise SupportError(f"start point must have length {cfg.params.basis.n}")
    if cfg.support is not None:
        for i, a in enumerate(cfg.support):
            if x0[i] not in a:
                raise SupportError(f"start coordinate {i}={x0[i]} outside its alphabet")
    return x0


class _Engine:
    """Sweep engine holding the quantities reused across sweeps.

    The conditional center for coordinate i is
    (b_i . c - (G x)_i + x_i G_ii) / G_ii with G = B^T B, so maintaining
    g = G x makes each coordinate update scalar work plus one row update.
    Consumes exactly one uniform per coordinate, drawing through the same
    inverse CDF as sample_1d.
    """

    def __init__(self, cfg: ChainConfig, coords):
        basis = cfg.params.basis
        self.cfg = cfg
        self.gram = basis.columns.T @ basis.columns
        self.ctb = basis.columns.T @ cfg.params.center
        self.sq = np.diag(self.gram).copy()
        self.scales = cfg.params.sigma / basis.col_norms
        self.coords = np.asarray(coords, dtype=np.int64).copy()
        self.g = self.gram @ self.coords.astype(float)

    def sweep(self, rng):
        cfg = self.cfg
        coords = self.coords
        g = self.g
        for i in range(len(coords) - 1, -1, -1):
            center = (self.ctb[i] - g[i] + coords[i] * self.sq[i]) / self.sq[i]
            scale = self.scales[i]
            if cfg.support is not None:
                values = cfg.support[i]
            else:
                values = Gaussian1D(center=center, scale=scale).values()
            new = draw_conditional(center, scale, values, rng.random())
            if new != coords[i]:
                g += (new - coords[i]) * self.gram[i]
                coords[i] = new


def sweep(state: ChainState, cfg: ChainConfig) -> ChainState:
    """Apply one Markov move (full n .. 1 scan) and return the new state."""
    eng = _Engine(cfg, state.coords)
    eng.sweep(state.rng)
    return ChainState(coords=eng.coords, sweep=state.sweep + 1, rng=state.rng)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def run_chain(cfg: ChainConfig, x0, rng) -> list[ChainState]:
    """Run the chain from x0 and return the states collected after each
    sweep with index in (collect_from, sweeps]. rng is a numpy Generator or
    a seed; a fixed seed reproduces the trajectory bit for bit."""
    rng = _as_rng(rng)
    eng = _Engine(cfg, _check_start(cfg, x0))
    out = []
    for t in range(1, cfg.sweeps + 1):
        eng.sweep(rng)
        if t > cfg.collect_from:
            out.append(ChainState(coords=eng.coords.copy(), sweep=t, rng=rng))
    return out


def collect_coords(states) -> np.ndarray:
    """Stack the coordinates of collected states into a (T, n) int array."""
    return np.array([s.coords for s in states], dtype=np.int64)


def normalize_alphabet(alphabet, n: int) -> tuple:
    """Coerce an alphabet spec into one sorted int64 array per coordinate.

    Accepts a single flat collection of integers (shared by every
    coordinate) or a sequence of n per-coordinate collections.
    """
    if alphabet is None:
        raise SupportError("an alphabet is required")
    try:
        arr = np.asarray(alphabet, dtype=np.int64)
    except (TypeError, ValueError):
        arr = None
    if arr is not None and arr.ndim == 1:
        if arr.size == 0:
            raise SupportError("empty alphabet")
        return (np.sort(arr),) * n
    if arr is not None and arr.ndim == 2:
        seq = list(arr)
    else:
        seq = list(alphabet)
    support = tuple(np.sort(np.asarray(a, dtype=np.int64)) for a in seq)
    if len(support) == 1:
        support = support * n
    if len(support) != n:
        raise SupportError(f"need {n} per-coordinate alphabets, got {len(support)}")
    if any(a.size == 0 for a in support):
        raise SupportError("empty alphabet")
    return support


def lr_aided_chain(
    basis,
    sigma: float,
    center,
    x0,
    sweeps: int,
    delta: float = DEFAULT_DELTA,
    rng=None,
    collect_from: int = 0,
    support=None,
) -> list[np.ndarray]:
    """Reduction-aided Gibbs sampling: run the chain against the LLL-reduced
    basis and return collected samples mapped back to original coordinates.

    The target is unchanged -- Bbar z and B x describe the same lattice
    point -- but the reduced parameterization has less correlated
    coordinates and so mixes faster. Only the full-integer support is
    accepted: a finite alphabet has no usable image under the unimodular
    transform, so reduction must stay out of that mixing.
    """
    if support is not None:
        raise SupportError(
            "finite alphabets are incompatible with reduction-aided mixing; "
            "run finite_alphabet_chain on the original basis instead"
        )
    basis = as_basis(basis)
    red = lll_reduce(basis, delta)
    z0 = red.to_reduced_coords(np.asarray(x0, dtype=np.int64))
    cfg = ChainConfig(
        params=GaussianParams(basis=red.reduced, sigma=sigma, center=np.asarray(center, float)),
        sweeps=sweeps,
        collect_from=collect_from,
    )
    states = run_chain(cfg, z0, rng if rng is not None else 0)
    return [red.to_original_coords(s.coords) for s in states]


def finite_alphabet_chain(
    basis, sigma: float, center, alphabet, x0, sweeps: int, rng=None, collect_from: int = 0
) -> list[ChainState]:
    """Gibbs sampling with each conditional renormalized over a finite
    per-coordinate alphabet. alphabet is one int array per coordinate, or a
    single array shared by all coordinates."""
    basis = as_basis(basis)
    support = normalize_alphabet(alphabet, basis.n)
    cfg = ChainConfig(
        params=GaussianParams(basis=basis, sigma=sigma, center=np.asarray(center, float)),
        sweeps=sweeps,
        support=support,
        collect_from=collect_from,
    )
    return run_chain(cfg, x0, rng if rng is not None else 0)
