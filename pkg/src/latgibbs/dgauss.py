"""Discrete Gaussians: the Gaussian weight function, exact one-dimensional
sampling over the integers (or a finite alphabet), and exact pmf enumeration
over boxes of integer vectors.

The enumeration routines are the ground-truth oracles the rest of the test
suite measures Markov chains against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EnumerationLimitError, SupportError
from .lattice import Basis, as_basis, round_half_away

# Half-width of the truncation window in units of max(scale, 1). The
# discarded tail mass is below exp(-WINDOW_SIGMAS^2 / 2) ~ 1e-31.
WINDOW_SIGMAS = 12.0
# Hard cap on exact enumeration.
MAX_BOX_POINTS = 10**7


def rho(z, sigma: float, center=None) -> float:
    """Gaussian weight exp(-||z - c||^2 / (2 sigma^2)) in (0, 1]."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    z = np.asarray(z, dtype=float)
    d = z - (0.0 if center is None else np.asarray(center, dtype=float))
    return float(np.exp(-(d @ d) / (2.0 * sigma * sigma)))


@dataclass(frozen=True)
class GaussianParams:
    """Target distribution over integer vectors x, with weight
    exp(-||B x - c||^2 / (2 sigma^2))."""

    basis: Basis
    sigma: float
    center: np.ndarray

    def __post_init__(self):
        basis = as_basis(self.basis)
        object.__setattr__(self, "basis", basis)
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        c = np.asarray(self.center, dtype=float)
        if c.shape != (basis.n,):
            raise DomainError(f"center must have length {basis.n}, got {c.shape}")
        object.__setattr__(self, "center", c)


@dataclass(frozen=True)
class Gaussian1D:
    """A one-dimensional discrete Gaussian, either over all integers
    (truncated to a window carrying all but ~1e-31 of the mass) or over an
    explicit finite integer support."""

    center: float
    scale: float
    support: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.scale <= 0:
            raise DomainError(f"scale must be positive, got {self.scale}")
        if self.support is not None:
            s = np.asarray(self.support, dtype=np.int64)
            if s.size == 0:
                raise SupportError("finite support is empty")
            object.__setattr__(self, "support", np.sort(s))

    def values(self) -> np.ndarray:
        """Integer support: the explicit alphabet, or the truncation window."""
        if self.support is not None:
            return self.support
        w = WINDOW_SIGMAS * max(self.scale, 1.0)
        lo = int(round_half_away(self.center - w))
        hi = int(round_half_away(self.center + w))
        return np.arange(lo, hi + 1, dtype=np.int64)

    def pmf(self) -> np.ndarray:
        """Exact normalized probabilities aligned with values()."""
        v = self.values()
        t = (v - self.center) / self.scale
        w = -0.5 * t * t
        w = np.exp(w - w.max())
        return w / w.sum()


def draw_conditional(center: float, scale: float, values: np.ndarray, u: float) -> int:
    """Inverse-CDF draw at uniform u from the discrete Gaussian with the
    given center and scale restricted to the integer array values."""
    if len(values) <= 16:
        # Tiny supports (QAM alphabets) dominate the MIMO inner loop; plain
        # floats beat numpy dispatch there.
        inv = -0.5 / (scale * scale)
        es = [(v - center) * (v - center) * inv for v in values.tolist()]
        shift = max(es)
        total = 0.0
        cum = []
        for e in es:
            total += math.exp(e - shift)
            cum.append(total)
        target = u * total
        for v, cv in zip(values.tolist(), cum):
            if cv > target:
                return int(v)
        return int(values[-1])
    t = (values - center) / scale
    w = -0.5 * t * t
    cum = np.cumsum(np.exp(w - w.max()))
    return int(values[np.searchsorted(cum, u * cum[-1], side="right")])


def sample_1d(g: Gaussian1D, rng: np.random.Generator, size=None):
    """Draw from a 1-D discrete Gaussian by exact inverse CDF.

    Consumes exactly one uniform per draw. With size=None returns a Python
    int; otherwise an int64 array of that shape.
    """
    v = g.values()
    if size is None:
        return draw_conditional(g.center, g.scale, v, rng.random())
    t = (v - g.center) / g.scale
    w = -0.5 * t * t
    cum = np.cumsum(np.exp(w - w.max()))
    u = rng.random(size)
    return v[np.searchsorted(cum, u * cum[-1], side="right")]


def _box_ranges(box):
    ranges = []
    for lo, hi in box:
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise DomainError(f"empty box range ({lo}, {hi})")
        ranges.append((lo, hi))
    return ranges


def box_states(box) -> np.ndarray:
    """All integer vectors in the box, as an (S, n) int64 array in
    row-major (last coordinate fastest) order."""
    ranges = _box_ranges(box)
    dims = [hi - lo + 1 for lo, hi in ranges]
    total = int(np.prod(dims, dtype=np.int64))
    if total > MAX_BOX_POINTS:
        raise EnumerationLimitError(f"box holds {total} > {MAX_BOX_POINTS} points")
    grids = np.meshgrid(*[np.arange(lo, hi + 1) for lo, hi in ranges], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def pmf_on_box(params: GaussianParams, box, check_mass: bool = True):
    """Exact pmf of the target restricted to a box of integer vectors.

    Returns (states, probs): an (S, n) int64 array and the matching
    normalized probabilities. When check_mass is set, rejects boxes whose
    boundary shell carries a non-negligible share of the mass, which is the
    operational proxy for "the box captures all but <= 1e-9 of the weight".
    """
    states = box_states(box)
    e = states @ params.basis.columns.T - params.center
    sq = np.einsum("ij,ij->i", e, e)
    w = np.exp(-(sq - sq.min()) / (2.0 * params.sigma**2))
    total = w.sum()
    if check_mass:
        ranges = _box_ranges(box)
        shell = np.zeros(len(states), dtype=bool)
        for i, (lo, hi) in enumerate(ranges):
            shell |= (states[:, i] == lo) | (states[:, i] == hi)
        if w[shell].sum() > 1e-9 * total:
            raise DomainError(
                "box boundary carries significant probability mass; enlarge the box"
            )
    return states, w / total


def lattice_pmf_exact(params: GaussianParams, box) -> dict:
    """Exact truncated pmf as a map {integer tuple: probability}.

    This is the enumeration oracle: probabilities sum to 1 up to float
    round-off, and the argmax is the closest lattice point to the center.
    """
    states, probs = pmf_on_box(params, box)
    return {tuple(int(v) for v in s): float(p) for s, p in zip(states, probs)}


def default_box(params: GaussianParams, halfwidth_sigmas: float | None = None):
    """A box around the real solution of B x = c sized so the discarded
    Gaussian mass is negligible (heuristic; pmf_on_box still checks)."""
    basis = params.basis
    n = basis.n
    if halfwidth_sigmas is None:
        halfwidth_sigmas = np.sqrt(n) + 8.5
    binv = np.linalg.inv(basis.columns)
    mid = binv @ params.center
    row_norms = np.linalg.norm(binv, axis=1)
    half = np.ceil(halfwidth_sigmas * params.sigma * row_norms).astype(int) + 1
    lo = round_half_away(mid) - half
    hi = round_half_away(mid) + half
    return [(int(a), int(b)) for a, b in zip(lo, hi)]
