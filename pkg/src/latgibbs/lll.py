"""LLL basis reduction with full unimodular bookkeeping.

The reduction returns both the reduced basis Bbar and the integer transform
pair (U, U^-1) with Bbar = B U, so integer coordinates can be mapped between
the two parameterizations exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularBasisError
from .lattice import Basis, as_basis, gram_schmidt, round_half_away

DEFAULT_DELTA = 0.75
# Slack applied to both LLL conditions when verifying a float basis.
CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class ReductionResult:
    """Outcome of lll_reduce: Bbar = B U with U unimodular."""

    reduced: Basis
    unimodular: np.ndarray
    unimodular_inv: np.ndarray
    delta: float

    def to_reduced_coords(self, x):
        """Map x-coordinates (original basis) to z-coordinates (reduced)."""
        return self.unimodular_inv @ np.asarray(x, dtype=np.int64)

    def to_original_coords(self, z):
        """Map z-coordinates (reduced basis) back to x-coordinates."""
        return self.unimodular @ np.asarray(z, dtype=np.int64)


def is_lll_reduced(basis, delta: float = DEFAULT_DELTA) -> bool:
    """True iff the size-reduction and Lovasz conditions hold for delta.

    Each inequality gets CHECK_SLACK of slack (absolute on |mu|, relative on
    the Lovasz norms) so bases produced in floating point verify cleanly.
    """
    basis = as_basis(basis)
    _check_delta(delta)
    n = basis.n
    mu = basis.mu
    sq = basis.gs_norms**2
    for i in range(1, n):
        for j in range(i):
            if abs(mu[i, j]) > 0.5 + CHECK_SLACK:
                return False
    for i in range(n - 1):
        # ||mu_{i+1,i} gs_i + gs_{i+1}||^2 = mu^2 sq_i + sq_{i+1}
        lhs = delta * sq[i]
        rhs = mu[i + 1, i] ** 2 * sq[i] + sq[i + 1]
        if lhs > rhs + CHECK_SLACK * sq[i]:
            return False
    return True


def size_reduce(basis, k: int, l: int) -> Basis:
    """Size-reduce column k against column l (0-based, l < k).

    Returns a new Basis with b_k <- b_k - round(mu_{k,l}) b_l. The lattice
    is unchanged.
    """
    basis = as_basis(basis)
    if not l < k:
        raise DomainError(f"need l < k, got k={k}, l={l}")
    cols = basis.columns.copy()
    r = int(round_half_away(basis.mu[k, l]))
    if r != 0:
        cols[:, k] -= r * cols[:, l]
    return Basis(cols)


def _check_delta(delta):
    if not 0.25 < delta < 1.0:
        raise DomainError(f"delta must lie in (1/4, 1), got {delta}")


class _Worker:
    """Private working copy: basis columns plus incrementally maintained
    GSO data (mu, squared GS norms) and the integer transforms U, U^-1."""

    def __init__(self, cols, u, uinv):
        self.b = cols
        self.u = u
        self.uinv = uinv
        gs, self.mu = gram_schmidt(cols)
        self.sq = np.sum(gs * gs, axis=0)

    def size_reduce(self, k, l):
        r = int(round_half_away(self.mu[k, l]))
        if r == 0:
            return
        self.b[:, k] -= r * self.b[:, l]
        self.u[:, k] -= r * self.u[:, l]
        self.uinv[l, :] += r * self.uinv[k, :]
        # GS vectors are unchanged; only row k of mu moves.
        self.mu[k, :l] -= r * self.mu[l, :l]
        self.mu[k, l] -= r

    def swap(self, k):
        """Swap columns k-1 and k, updating mu and sq in place."""
        self.b[:, [k - 1, k]] = self.b[:, [k, k - 1]]
        self.u[:, [k - 1, k]] = self.u[:, [k, k - 1]]
        self.uinv[[k - 1, k], :] = self.uinv[[k, k - 1], :]
        mu, sq = self.mu, self.sq
        m = mu[k, k - 1]
        bk = sq[k] + m * m * sq[k - 1]
        mu_new = m * sq[k - 1] / bk
        sq[k] = sq[k - 1] * sq[k] / bk
        sq[k - 1] = bk
        mu[k, k - 1] = mu_new
        if k >= 2:
            mu[[k - 1, k], : k - 1] = mu[[k, k - 1], : k - 1]
        n = len(sq)
        for i in range(k + 1, n):
            t = mu[i, k]
            mu[i, k] = mu[i, k - 1] - m * t
            mu[i, k - 1] = t + mu_new * mu[i, k]


def lll_reduce(basis, delta: float = DEFAULT_DELTA) -> ReductionResult:
    """LLL-reduce a basis, accumulating the unimodular transform.

    Control flow: size-reduce b_k against b_{k-1}; on a Lovasz violation
    swap and step back, otherwise size-reduce b_k against b_{k-2}..b_1 and
    advance. The deferred reductions run only in the advance branch.

    Returns
    -------
    ReductionResult
        reduced basis Bbar, integer U and U^-1 with Bbar = B U and
        det(U) = +-1, and the delta used.
    """
    basis = as_basis(basis)
    _check_delta(delta)
    n = basis.n
    u = np.eye(n, dtype=np.int64)
    uinv = np.eye(n, dtype=np.int64)
    cols = basis.columns.copy()
    # Floating-point GSO updates can drift on long runs; re-run from a fresh
    # orthogonalization until the result verifies.
    for _ in range(4):
        w = _Worker(cols, u, uinv)
        k = 1
        while k < n:
            w.size_reduce(k, k - 1)
            if w.sq[k] < (delta - w.mu[k, k - 1] ** 2) * w.sq[k - 1]:
                w.swap(k)
                k = max(k - 1, 1)
            else:
                for l in range(k - 2, -1, -1):
                    w.size_reduce(k, l)
                k += 1
        cols, u, uinv = w.b, w.u, w.uinv
        reduced = Basis(cols)
        if is_lll_reduced(reduced, delta):
            return ReductionResult(
                reduced=reduced, unimodular=u, unimodular_inv=uinv, delta=delta
            )
    raise SingularBasisError("LLL failed to verify after repeated passes")
