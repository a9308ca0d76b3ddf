"""Large-scale MIMO detection experiments.

Square M-QAM with Gray mapping, complex channels embedded as real lattices,
and BER sweeps over E_b/N_0 comparing the classical one-shot detectors (ZF,
SIC, SIC with LLL) against their Gibbs-sampling refinements. Reduction only
ever supplies initial points and gate radii here; the Markov mixing itself
stays on the original finite alphabet.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .decoder import (
    SigmaStrategy,
    clamp_to_alphabet,
    sampler_decode,
)
from .errors import DomainError
from .lattice import Basis, babai_nearest_plane, round_half_away, zero_forcing
from .lll import lll_reduce

DETECTORS = ("zf", "sic", "sic-lll", "gibbs-zf", "gibbs-sic", "gibbs-sic-lll")

# Antenna-count presets; 24x24 works but each Gibbs frame costs several
# times the 8x8 figure, so budget accordingly.
PRESETS = {"8x8": 8, "12x12": 12, "16x16": 16, "24x24": 24}


# --- Gray-mapped square QAM -------------------------------------------------


def _gray_encode(u: int) -> int:
    return u ^ (u >> 1)


def _gray_decode(g: int) -> int:
    u = g
    shift = 1
    while (g >> shift) > 0:
        u ^= g >> shift
        shift <<= 1
    return u


def _qam_geometry(m: int):
    levels = round(np.sqrt(m))
    k = int(np.log2(m)) if m >= 4 else 0
    if levels * levels != m or 4**round(k / 2) != m:
        raise DomainError(f"M must be a square power of 4, got {m}")
    scale = 1.0 / np.sqrt(2.0 * (levels * levels - 1) / 3.0)
    return levels, k // 2, scale


def bits_to_axis_indices(bits, m: int):
    """Split a bit string into Gray-decoded per-axis level indices.

    Each symbol consumes log2(M) bits: the first half (MSB first) selects
    the I level, the second half the Q level. Returns (u_i, u_q) index
    arrays in 0 .. sqrt(M)-1.
    """
    levels, half, _ = _qam_geometry(m)
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % (2 * half) != 0:
        raise DomainError(f"bit count {bits.size} not divisible by log2(M)={2 * half}")
    groups = bits.reshape(-1, 2 * half)
    weights = 1 << np.arange(half - 1, -1, -1)
    gray_i = groups[:, :half] @ weights
    gray_q = groups[:, half:] @ weights
    dec = np.array([_gray_decode(g) for g in range(levels)])
    return dec[gray_i], dec[gray_q]


def axis_indices_to_bits(u_i, u_q, m: int) -> np.ndarray:
    """Inverse of bits_to_axis_indices."""
    levels, half, _ = _qam_geometry(m)
    enc = np.array([_gray_encode(u) for u in range(levels)])
    out = np.empty((len(u_i), 2 * half), dtype=np.int64)
    for col in range(half):
        shift = half - 1 - col
        out[:, col] = (enc[np.asarray(u_i)] >> shift) & 1
        out[:, half + col] = (enc[np.asarray(u_q)] >> shift) & 1
    return out.ravel()


def qam_modulate(bits, m: int) -> np.ndarray:
    """Gray-mapped square M-QAM with unit average symbol energy."""
    levels, _, scale = _qam_geometry(m)
    u_i, u_q = bits_to_axis_indices(bits, m)
    amp = lambda u: (2 * u - (levels - 1)) * scale  # noqa: E731
    return amp(u_i) + 1j * amp(u_q)


def qam_demodulate(symbols, m: int) -> np.ndarray:
    """Nearest-constellation-point demapping back to bits."""
    levels, _, scale = _qam_geometry(m)
    to_index = lambda a: np.clip(  # noqa: E731
        round_half_away((a / scale + (levels - 1)) / 2.0), 0, levels - 1
    )
    s = np.asarray(symbols, dtype=complex)
    return axis_indices_to_bits(to_index(s.real), to_index(s.imag), m)


def constellation(m: int) -> np.ndarray:
    """All M constellation points."""
    levels, _, scale = _qam_geometry(m)
    amps = (2 * np.arange(levels) - (levels - 1)) * scale
    return (amps[:, None] + 1j * amps[None, :]).ravel()


# --- complex/real embedding and SNR accounting ------------------------------


def complexify_to_real(h_complex, c_complex):
    """Standard [Re -Im; Im Re] embedding of a square complex system.

    Real coordinates stack the I components of all antennas first, then the
    Q components; Euclidean norms are preserved.
    """
    h = np.asarray(h_complex, dtype=complex)
    c = np.asarray(c_complex, dtype=complex)
    hr = np.block([[h.real, -h.imag], [h.imag, h.real]])
    return hr, np.concatenate([c.real, c.imag])


def snr_to_noise_variance(snr_db: float, n: int, m: int) -> float:
    """Complex noise variance from E_b/N_0 in dB: n / (log2(M) 10^(dB/10))."""
    if m < 4:
        raise DomainError(f"M must be >= 4, got {m}")
    return n / (np.log2(m) * 10.0 ** (snr_db / 10.0))


# --- experiment harness ------------------------------------------------------


@dataclass(frozen=True)
class MimoConfig:
    """One BER experiment: frames of a flat-fading square MIMO channel,
    detected at each SNR point by each configured detector."""

    n_complex: int
    qam: int
    snr_db_list: tuple
    sweeps: int
    strategy: SigmaStrategy
    alpha: float | None
    detector: tuple
    seed: int
    frames: int = 10_000

    def __post_init__(self):
        _qam_geometry(self.qam)
        if self.frames < 1:
            raise DomainError(f"frames must be >= 1, got {self.frames}")
        if self.n_complex < 1:
            raise DomainError(f"n_complex must be >= 1, got {self.n_complex}")
        if self.alpha is not None and self.alpha < 1:
            raise DomainError(f"alpha must be >= 1 or None, got {self.alpha}")
        dets = (self.detector,) if isinstance(self.detector, str) else tuple(self.detector)
        for d in dets:
            if d not in DETECTORS:
                raise DomainError(f"unknown detector {d!r}; choose from {DETECTORS}")
        object.__setattr__(self, "detector", dets)
        object.__setattr__(self, "snr_db_list", tuple(float(s) for s in self.snr_db_list))


@dataclass(frozen=True)
class BerRecord:
    """Aggregate of one (detector, SNR) cell."""

    detector: str
    snr_db: float
    frames: int
    bit_errors: int
    bits_total: int
    ber: float
    startup_skip_rate: float
    wall_seconds: float

    @property
    def ber_sigma(self) -> float:
        """Binomial standard error of the BER estimate."""
        return float(np.sqrt(self.ber * (1.0 - self.ber) / self.bits_total))


def _snr_code(snr_db: float) -> int:
    return int(round(snr_db * 1000.0)) & 0xFFFFFFFF


def _frame_rng(seed: int, snr_db: float, frame: int, stream: int):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(_snr_code(snr_db), frame, stream))
    return np.random.default_rng(ss)


def _materialize_strategy(strategy: SigmaStrategy, sigma_w, snr_linear, n_real):
    """Fill in the per-SNR parameters a strategy needs at decode time."""
    if strategy.kind == "statistic" and strategy.sigma_w is None:
        return dataclasses.replace(strategy, sigma_w=sigma_w)
    if strategy.kind == "hassibi":
        return dataclasses.replace(
            strategy,
            snr=strategy.snr if strategy.snr is not None else snr_linear,
            n=strategy.n if strategy.n is not None else n_real,
            sigma_w=strategy.sigma_w if strategy.sigma_w is not None else sigma_w,
        )
    return strategy


def frame_instance(cfg: MimoConfig, snr_db: float, frame: int):
    """Draw one frame (channel, bits, noise) and return the detection-side
    integer lattice system: basis matrix, target, tx bits.

    Detection runs in odd-integer symbol units: the received signal is
    divided by the constellation scale so the per-axis amplitudes are
    +-1, +-3, ..., then shifted to consecutive levels 0 .. L-1. The
    anti-stalling floor on sigma is an absolute quantity, so the lattice
    scale matters: in these units the statistic rule freezes at high SNR
    exactly as the stalling analysis says, while unit-energy units would
    leave every chain mobile and invert the detector orderings.
    """
    n = cfg.n_complex
    levels, _, scale = _qam_geometry(cfg.qam)
    rng = _frame_rng(cfg.seed, snr_db, frame, 0)
    h = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    bits = rng.integers(0, 2, n * int(np.log2(cfg.qam)))
    symbols = qam_modulate(bits, cfg.qam)
    var_w = snr_to_noise_variance(snr_db, n, cfg.qam)
    noise = np.sqrt(var_w / 2.0) * (
        rng.standard_normal(n) + 1j * rng.standard_normal(n)
    )
    received = h @ symbols + noise
    h_real, c_real = complexify_to_real(h, received)
    basis_mat = 2.0 * h_real
    target = c_real / scale + (levels - 1) * (h_real @ np.ones(2 * n))
    return basis_mat, target, bits


def _detect_one_shot(detector: str, basis_mat, target, levels):
    """Decode one frame with a non-sampling detector, clamped to levels."""
    support = (np.arange(levels, dtype=np.int64),) * basis_mat.shape[0]
    basis = Basis(basis_mat)
    if detector == "zf":
        return clamp_to_alphabet(zero_forcing(basis, target), support)
    if detector == "sic":
        return clamp_to_alphabet(babai_nearest_plane(basis, target), support)
    red = lll_reduce(basis)
    z = babai_nearest_plane(red.reduced, target)
    return clamp_to_alphabet(red.to_original_coords(z), support)


def _run_frames(cfg: MimoConfig, detector: str, snr_db: float, lo: int, hi: int):
    """Detect frames lo..hi-1; returns (bit_errors, bits_total, skips)."""
    n = cfg.n_complex
    levels, _, scale = _qam_geometry(cfg.qam)
    n_real = 2 * n
    var_w = snr_to_noise_variance(snr_db, n, cfg.qam)
    # noise deviation per real component, in detection (odd-integer) units
    sigma_w_det = np.sqrt(var_w / 2.0) / scale
    strategy = _materialize_strategy(
        cfg.strategy, sigma_w_det, 10.0 ** (snr_db / 10.0), n_real
    )
    errors = 0
    skips = 0
    bits_total = 0
    for frame in range(lo, hi):
        basis_mat, target, bits = frame_instance(cfg, snr_db, frame)
        if detector.startswith("gibbs-"):
            outcome = sampler_decode(
                Basis(basis_mat),
                target,
                sweeps=cfg.sweeps,
                strategy=strategy,
                alpha=cfg.alpha,
                mode="finite-alphabet",
                seed=_frame_rng(cfg.seed, snr_db, frame, 1),
                alphabet=np.arange(levels, dtype=np.int64),
                initial=detector[len("gibbs-") :],
            )
            indices, skipped = outcome.estimate, not outcome.sampler_invoked
        else:
            indices, skipped = _detect_one_shot(detector, basis_mat, target, levels), False
        bits_hat = axis_indices_to_bits(indices[:n], indices[n:], cfg.qam)
        errors += int(np.sum(bits_hat != bits))
        skips += int(skipped)
        bits_total += bits.size
    return errors, bits_total, skips


def run_ber_experiment(cfg: MimoConfig, threads: int = 1) -> list[BerRecord]:
    """Run the configured BER sweep. Frames are seeded independently from
    (seed, snr, frame), so every detector sees identical channel draws and
    parallel runs aggregate identically to serial ones."""
    records = []
    for detector in cfg.detector:
        for snr_db in cfg.snr_db_list:
            t0 = time.perf_counter()
            if threads > 1:
                bounds = np.linspace(0, cfg.frames, threads * 2 + 1, dtype=int)
                chunks = [
                    (cfg, detector, snr_db, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if b > a
                ]
                with ProcessPoolExecutor(max_workers=threads) as pool:
                    parts = list(pool.map(_run_frames_star, chunks))
            else:
                parts = [_run_frames(cfg, detector, snr_db, 0, cfg.frames)]
            errors = sum(p[0] for p in parts)
            bits_total = sum(p[1] for p in parts)
            skips = sum(p[2] for p in parts)
            records.append(
                BerRecord(
                    detector=detector,
                    snr_db=snr_db,
                    frames=cfg.frames,
                    bit_errors=errors,
                    bits_total=bits_total,
                    ber=errors / bits_total,
                    startup_skip_rate=skips / cfg.frames,
                    wall_seconds=time.perf_counter() - t0,
                )
            )
    return records


def _run_frames_star(args):
    return _run_frames(*args)
