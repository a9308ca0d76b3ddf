"""Exact convergence diagnostics on truncated state spaces.

Everything here enumerates a finite box of integer vectors and works with
exact linear algebra: the composite sweep kernel, total-variation decay,
maximal correlation between coordinate blocks, the spectral rate of the
marginal chain, and small-dimension enumeration solvers (shortest vector,
closest vector) used as test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgauss import GaussianParams, box_states, pmf_on_box
from .errors import DomainError, EnumerationLimitError
from .lattice import as_basis, babai_nearest_plane
from .lll import DEFAULT_DELTA, lll_reduce

# Dense kernels get built explicitly, so cap the state count.
MAX_KERNEL_STATES = 10_000
# Values below this are float noise and excluded from decay-rate fits.
TV_FLOOR = 1e-12


@dataclass
class FiniteChain:
    """A Markov chain on an explicit list of integer-vector states."""

    states: np.ndarray
    kernel: np.ndarray
    stationary: np.ndarray

    def index_of(self, state) -> int:
        state = np.asarray(state, dtype=np.int64)
        hit = np.nonzero((self.states == state).all(axis=1))[0]
        if hit.size == 0:
            raise DomainError(f"state {state.tolist()} not in the truncated space")
        return int(hit[0])

    def max_row_error(self) -> float:
        return float(np.abs(self.kernel.sum(axis=1) - 1.0).max())

    def stationarity_error(self) -> float:
        return float(np.abs(self.stationary @ self.kernel - self.stationary).max())


@dataclass(frozen=True)
class CorrelationReport:
    """Convergence-rate verdict for a two-block chain: the maximal
    correlation between blocks, the spectral rate of the marginal chain on
    mean-zero functions, and a rate fitted from the TV decay curve."""

    gamma: float
    rho_spectral: float
    rho_empirical: float
    block_split: int


def _conditional_kernel(params: GaussianParams, states, box, i: int) -> np.ndarray:
    """Kernel of the single-coordinate update for coordinate i, with the
    conditional renormalized over the box range of that coordinate."""
    basis = params.basis
    lo, hi = int(box[i][0]), int(box[i][1])
    vals = np.arange(lo, hi + 1, dtype=np.int64)
    b_i = basis.columns[:, i]
    sq = basis.col_norms[i] ** 2
    emb = states.astype(float) @ basis.columns.T
    centers = (params.center - emb) @ b_i / sq + states[:, i]
    scale = params.sigma / basis.col_norms[i]
    t = (vals[None, :] - centers[:, None]) / scale
    w = np.exp(-0.5 * t * t - (-0.5 * t * t).max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    # Column index of the state reached by setting coordinate i to vals[a]:
    # states are in row-major order, so moving coordinate i by one step
    # moves the linear index by the product of trailing dimensions.
    dims = [int(h) - int(l) + 1 for l, h in box]
    stride = int(np.prod(dims[i + 1 :], dtype=np.int64)) if i + 1 < len(dims) else 1
    s = np.arange(len(states))
    base = s - (states[:, i] - lo) * stride
    kernel = np.zeros((len(states), len(states)))
    kernel[s[:, None], base[:, None] + np.arange(len(vals))[None, :] * stride] = w
    return kernel


def build_sweep_kernel(params: GaussianParams, box) -> FiniteChain:
    """Exact kernel of one full systematic sweep (coordinates n .. 1) on the
    box-truncated target, together with its stationary distribution."""
    states, probs = pmf_on_box(params, box, check_mass=False)
    if len(states) > MAX_KERNEL_STATES:
        raise EnumerationLimitError(
            f"{len(states)} states exceed the kernel cap {MAX_KERNEL_STATES}"
        )
    n = params.basis.n
    kernel = None
    for i in range(n - 1, -1, -1):
        k_i = _conditional_kernel(params, states, box, i)
        kernel = k_i if kernel is None else kernel @ k_i
    return FiniteChain(states=states, kernel=kernel, stationary=probs)


def tv_decay(chain: FiniteChain, x0, t_max: int) -> list[float]:
    """Exact ||P^t(x0, .) - pi||_TV for t = 0 .. t_max."""
    dist = np.zeros(len(chain.states))
    dist[chain.index_of(x0)] = 1.0
    out = []
    for _ in range(t_max + 1):
        out.append(0.5 * float(np.abs(dist - chain.stationary).sum()))
        dist = dist @ chain.kernel
    return out


def worst_start_tv_curve(chain: FiniteChain, t_max: int) -> list[float]:
    """max over starting states of the exact TV distance at each t."""
    dist = np.eye(len(chain.states))
    out = []
    for _ in range(t_max + 1):
        out.append(0.5 * float(np.abs(dist - chain.stationary).sum(axis=1).max()))
        dist = dist @ chain.kernel
    return out


def fit_decay_rate(tv_curve) -> float:
    """Geometric rate fitted by least squares on log TV over the last half
    of the curve, values below TV_FLOOR discarded. Returns 0.0 when the
    chain mixes too fast to leave a fittable tail."""
    tv = np.asarray(tv_curve, dtype=float)
    idx = np.nonzero(tv > TV_FLOOR)[0]
    if idx.size < 2:
        return 0.0
    idx = idx[idx.size // 2 :]
    if idx.size < 2:
        idx = np.nonzero(tv > TV_FLOOR)[0][-2:]
    slope = np.polyfit(idx, np.log(tv[idx]), 1)[0]
    return float(np.exp(slope))


# States whose marginal mass is below this share of the total are dropped
# before spectral work; they carry no information and their denormal
# weights break LAPACK.
MASS_FLOOR = 1e-13


def _trim_joint(joint):
    """Drop negligible-mass rows/columns and renormalize. Returns the
    trimmed joint plus the row and column keep-masks."""
    j = np.asarray(joint, dtype=float)
    rows = j.sum(axis=1) > MASS_FLOOR * j.sum()
    cols = j.sum(axis=0) > MASS_FLOOR * j.sum()
    j = j[rows][:, cols]
    return j / j.sum(), rows, cols


def hgr_correlation(joint) -> float:
    """Maximal correlation of two finite random variables from their joint
    pmf: the second singular value of J_ij / sqrt(p_i q_j)."""
    j = np.asarray(joint, dtype=float)
    total = j.sum()
    if not np.isclose(total, 1.0, atol=1e-8):
        raise DomainError(f"joint pmf sums to {total}, expected 1")
    j, _, _ = _trim_joint(j)
    p = j.sum(axis=1)
    q = j.sum(axis=0)
    if len(p) < 2 or len(q) < 2:
        raise DomainError("degenerate marginal: fewer than two states carry mass")
    m = j / np.sqrt(np.outer(p, q))
    s = np.linalg.svd(m, compute_uv=False)
    return float(min(max(s[1], 0.0), 1.0))


def joint_block_pmf(params: GaussianParams, box, m: int):
    """Exact joint pmf of (first m coordinates, rest) on the box, reshaped
    to a (#block-1 states, #block-2 states) matrix."""
    n = params.basis.n
    if not 0 < m < n:
        raise DomainError(f"block split must lie in (0, {n}), got {m}")
    _, probs = pmf_on_box(params, box, check_mass=False)
    dims = [int(hi) - int(lo) + 1 for lo, hi in box]
    a = int(np.prod(dims[:m], dtype=np.int64))
    return probs.reshape(a, -1)


def marginal_block_chain(params: GaussianParams, box, m: int) -> FiniteChain:
    """Marginal chain of the first coordinate block under the two-block
    sweep (block 2 refreshed given block 1, then block 1 given block 2).

    The kernel is K(a, b) = sum_c pi(c | a) pi(b | c), which is reversible
    with respect to the block-1 marginal. Negligible-mass block states are
    trimmed, consistently with hgr_correlation.
    """
    j, rows, _ = _trim_joint(joint_block_pmf(params, box, m))
    p = j.sum(axis=1)
    q = j.sum(axis=0)
    kernel = (j / p[:, None]) @ (j / q[None, :]).T
    a_states = box_states(box[:m])[rows]
    return FiniteChain(states=a_states, kernel=kernel, stationary=p)


def marginal_detailed_balance(chain: FiniteChain) -> float:
    """Largest reversibility violation max_{a,b} |pi_a K_ab - pi_b K_ba|."""
    flow = chain.stationary[:, None] * chain.kernel
    return float(np.abs(flow - flow.T).max())


def _meanzero_spectral_radius(kernel, stationary) -> float:
    """Spectral radius of the forward operator restricted to mean-zero
    functions, for a kernel reversible w.r.t. stationary: symmetrize,
    deflate the top (constant-function) eigenpair, take the largest
    remaining eigenvalue magnitude."""
    root = np.sqrt(stationary)
    s = kernel * (root[:, None] / root[None, :])
    s = 0.5 * (s + s.T)
    s -= np.outer(root, root)
    return float(np.abs(np.linalg.eigvalsh(s)).max())


def convergence_rate_report(
    basis, sigma: float, center, box, m: int = 1, t_max: int = 400
) -> CorrelationReport:
    """Measure the two-block chain three independent ways: the maximal
    correlation gamma between the blocks (SVD of the normalized joint), the
    spectral rate of the marginal chain on mean-zero functions, and a rate
    fitted to the exact worst-start TV decay. Geometric ergodicity predicts
    rho_spectral == gamma^2 exactly and the fitted rate close to it."""
    basis = as_basis(basis)
    params = GaussianParams(basis=basis, sigma=sigma, center=np.asarray(center, float))
    joint = joint_block_pmf(params, box, m)
    gamma = hgr_correlation(joint)
    chain = marginal_block_chain(params, box, m)
    rho_spectral = _meanzero_spectral_radius(chain.kernel, chain.stationary)
    rho_empirical = fit_decay_rate(worst_start_tv_curve(chain, t_max))
    return CorrelationReport(
        gamma=gamma,
        rho_spectral=rho_spectral,
        rho_empirical=rho_empirical,
        block_split=m,
    )


def _image_box(box, mat):
    """Bounding box of the image of an integer box under an integer matrix."""
    lo = np.array([r[0] for r in box], dtype=np.int64)
    hi = np.array([r[1] for r in box], dtype=np.int64)
    a = np.minimum(mat * lo[None, :], mat * hi[None, :]).sum(axis=1)
    b = np.maximum(mat * lo[None, :], mat * hi[None, :]).sum(axis=1)
    return [(int(x), int(y)) for x, y in zip(a, b)]


def reduction_improves_gamma(
    basis, sigma: float, center, box, delta: float = DEFAULT_DELTA, m: int = 1
):
    """Maximal correlation of the target in its original parameterization
    versus the LLL-reduced one.

    The x-side is truncated to the given box; the z-side to the bounding
    box of its unimodular image, so both truncations cover the same lattice
    points. Returns (gamma_before, gamma_after).
    """
    basis = as_basis(basis)
    center = np.asarray(center, dtype=float)
    params_x = GaussianParams(basis=basis, sigma=sigma, center=center)
    gamma_before = hgr_correlation(joint_block_pmf(params_x, box, m))
    red = lll_reduce(basis, delta)
    zbox = _image_box(box, red.unimodular_inv)
    params_z = GaussianParams(basis=red.reduced, sigma=sigma, center=center)
    gamma_after = hgr_correlation(joint_block_pmf(params_z, zbox, m))
    return gamma_before, gamma_after


def shortest_vector(basis, bound: float | None = None) -> float:
    """Exact minimum distance of the lattice by enumeration (n <= 6).

    bound is any known upper bound on lambda_1; defaults to the shortest
    column after LLL reduction, which also keeps the search box small.
    """
    basis = as_basis(basis)
    if basis.n > 6:
        raise EnumerationLimitError(f"enumeration limited to n <= 6, got {basis.n}")
    red = lll_reduce(basis).reduced
    if bound is None:
        bound = float(red.col_norms.min())
    binv = np.linalg.inv(red.columns)
    half = np.ceil(bound * np.linalg.norm(binv, axis=1) + 1e-9).astype(int)
    states = box_states([(-h, h) for h in half])
    emb = states.astype(float) @ red.columns.T
    norms = np.linalg.norm(emb, axis=1)
    norms = norms[np.any(states != 0, axis=1)]
    return float(norms.min())


def enumerate_cvp(basis, target) -> np.ndarray:
    """Exact closest-vector solution by brute-force enumeration.

    Works in the LLL-reduced parameterization around its Babai point: any
    optimum z* satisfies |z*_i - z0_i| <= 2 r ||row_i(Bbar^-1)|| where r is
    the anchor residual, which bounds the search box rigorously whatever
    the anchor quality.
    """
    basis = as_basis(basis)
    target = np.asarray(target, dtype=float)
    red = lll_reduce(basis)
    anchor = babai_nearest_plane(red.reduced, target)
    r = float(np.linalg.norm(red.reduced.embed(anchor) - target))
    if r == 0.0:
        return red.to_original_coords(anchor)
    binv = np.linalg.inv(red.reduced.columns)
    half = np.ceil(2.0 * r * np.linalg.norm(binv, axis=1) + 1e-9).astype(int)
    offsets = box_states([(-h, h) for h in half])
    cand = anchor[None, :] + offsets
    emb = cand.astype(float) @ red.reduced.columns.T - target
    best = int(np.argmin(np.einsum("ij,ij->i", emb, emb)))
    return red.to_original_coords(cand[best].astype(np.int64))
