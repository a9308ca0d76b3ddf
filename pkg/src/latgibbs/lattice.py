"""Lattice bases, Gram-Schmidt data, and the classical baseline decoders.

A basis is an n x n real matrix whose *columns* generate the lattice
{B x : x integer}. All arithmetic is 64-bit floating point; integer
coordinates are 64-bit signed integers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularBasisError

# Relative tolerance below which a Gram-Schmidt vector counts as zero.
SINGULAR_TOL = 1e-12
# Relative tolerance for the GSO orthogonality / reconstruction invariants.
ORTHO_TOL = 1e-9


def round_half_away(x):
    """Round to nearest integer, ties away from zero.

    The one tie rule used everywhere (ZF, Babai, LLL size reduction) so that
    decoder outputs are deterministic. Accepts scalars or arrays; returns
    int64.
    """
    x = np.asarray(x, dtype=float)
    out = np.copysign(np.floor(np.abs(x) + 0.5), x).astype(np.int64)
    return out if out.ndim else np.int64(out)


def gram_schmidt(columns):
    """Gram-Schmidt orthogonalization (no normalization) of basis columns.

    Parameters
    ----------
    columns : (n, n) array_like
        Basis vectors as columns.

    Returns
    -------
    gs_vectors : (n, n) ndarray
        Orthogonal vectors, column i orthogonal to all columns j < i.
    mu : (n, n) ndarray
        Projection coefficients mu[i, j] = <b_i, gs_j>/<gs_j, gs_j> for
        j < i, unit diagonal, zero above.

    Raises
    ------
    SingularBasisError
        If some orthogonalized vector has norm below SINGULAR_TOL relative
        to the largest input column.
    """
    b = np.array(columns, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise SingularBasisError(f"basis must be square, got shape {b.shape}")
    n = b.shape[1]
    gs = np.zeros_like(b)
    mu = np.eye(n)
    scale = np.max(np.linalg.norm(b, axis=0))
    sq = np.zeros(n)
    for i in range(n):
        v = b[:, i].copy()
        for j in range(i):
            # Modified GS: in exact arithmetic this mu equals <b_i, gs_j>/sq_j.
            m = v @ gs[:, j] / sq[j]
            mu[i, j] = m
            v -= m * gs[:, j]
        nv = np.linalg.norm(v)
        if nv < SINGULAR_TOL * scale:
            raise SingularBasisError(
                f"column {i} is linearly dependent (GS norm {nv:.3e})"
            )
        gs[:, i] = v
        sq[i] = nv * nv
    return gs, mu


class Basis:
    """Immutable full-rank lattice basis with cached Gram-Schmidt data.

    Attributes
    ----------
    columns : (n, n) ndarray
        Basis vectors b_i as columns (read-only view).
    gs_vectors : (n, n) ndarray
        Gram-Schmidt vectors as columns.
    mu : (n, n) ndarray
        Lower-triangular projection coefficients, unit diagonal.
    """

    def __init__(self, columns):
        cols = np.array(columns, dtype=float)
        self.gs_vectors, self.mu = gram_schmidt(cols)
        self.columns = cols
        self.gs_norms = np.linalg.norm(self.gs_vectors, axis=0)
        self.col_norms = np.linalg.norm(self.columns, axis=0)
        for a in (self.columns, self.gs_vectors, self.mu, self.gs_norms, self.col_norms):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return self.columns.shape[1]

    @property
    def min_gs_norm(self) -> float:
        return float(self.gs_norms.min())

    def embed(self, coords):
        """Map integer coordinates to the lattice point B @ coords."""
        return self.columns @ np.asarray(coords, dtype=float)

    def __repr__(self):
        return f"Basis(n={self.n})"


@dataclass(frozen=True)
class LatticePoint:
    """An integer coordinate vector together with its embedding B @ coords."""

    coords: np.ndarray
    embedded: np.ndarray

    @classmethod
    def from_coords(cls, basis: Basis, coords) -> "LatticePoint":
        c = np.asarray(coords, dtype=np.int64)
        return cls(coords=c, embedded=basis.embed(c))


def as_basis(b) -> Basis:
    """Coerce a raw matrix to Basis; pass Basis instances through."""
    return b if isinstance(b, Basis) else Basis(b)


def orthogonality_defect(basis) -> float:
    """Product of column norms over |det B|; equals 1 iff B is orthogonal.

    Computed in log space so large dimensions do not overflow prematurely.
    """
    basis = as_basis(basis)
    sign, logdet = np.linalg.slogdet(basis.columns)
    if sign == 0:
        raise SingularBasisError("zero determinant")
    return float(np.exp(np.sum(np.log(basis.col_norms)) - logdet))


def babai_nearest_plane(basis, target):
    """Babai's nearest plane (SIC): round coordinates along b_n down to b_1.

    Returns the integer vector x; B x is the nearest-plane lattice point to
    the target. Deterministic, ties away from zero.
    """
    basis = as_basis(basis)
    y = np.asarray(target, dtype=float).copy()
    n = basis.n
    x = np.zeros(n, dtype=np.int64)
    sq = basis.gs_norms**2
    for i in range(n - 1, -1, -1):
        x[i] = round_half_away(y @ basis.gs_vectors[:, i] / sq[i])
        y -= x[i] * basis.columns[:, i]
    return x


def zero_forcing(basis, target):
    """ZF decoder: componentwise rounding of B^{-1} target."""
    basis = as_basis(basis)
    try:
        sol = np.linalg.solve(basis.columns, np.asarray(target, dtype=float))
    except np.linalg.LinAlgError as e:
        raise SingularBasisError(str(e)) from None
    return round_half_away(sol)


# --- matrix / vector text files -------------------------------------------
#
# Format: first line is the dimension n; then one row per line of
# whitespace-separated decimal floats. A vector file carries n values after
# the header, either on one line or one per line.


def write_basis(path, matrix):
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    with open(path, "w") as fh:
        fh.write(f"{n}\n")
        for row in m:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_basis(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise SingularBasisError(f"{path}: empty matrix file")
    n = int(tokens[0])
    vals = [float(t) for t in tokens[1:]]
    if len(vals) != n * n:
        raise SingularBasisError(
            f"{path}: expected {n * n} entries for n={n}, found {len(vals)}"
        )
    return np.array(vals, dtype=float).reshape(n, n)


def write_vector(path, vec):
    v = np.asarray(vec, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"{v.size}\n")
        fh.write(" ".join(repr(float(x)) for x in v) + "\n")


def read_vector(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise SingularBasisError(f"{path}: empty vector file")
    n = int(tokens[0])
    vals = [float(t) for t in tokens[1:]]
    if len(vals) != n:
        raise SingularBasisError(f"{path}: expected {n} entries, found {len(vals)}")
    return np.array(vals, dtype=float)
