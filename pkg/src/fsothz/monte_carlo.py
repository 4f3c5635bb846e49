"""Channel samplers, estimators and switching traces.

Every analytical quantity has an estimator here built from the exact channel
mechanisms (product-of-Gammas scintillation, branch-wise alpha-mu MRC sums,
Rayleigh misalignment), so agreement bounds both the closed forms and the
single-variate aggregation approximations they build on.  Estimates are computed in fixed-size blocks
with one RNG substream per block and combined in block order, which makes
them bit-identical for a given (seed, partitioning) regardless of execution
order or parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal
from scipy import special as sp

from .channel_access import AccessLinkSpec
from .channel_fso import FsoLinkSpec, PointingGeometry
from .channel_thz import ThzLinkSpec
from .errors import DomainError
from .metrics_analytic import Modulation, SystemSpec, _xi_factor
from .switching import (HardPolicy, SoftPolicy, evaluate_soft_trace,
                        SwitchState)

__all__ = [
    "RngStream",
    "EstimateResult",
    "MIN_SAMPLES",
    "sample_fso_snr",
    "sample_thz_snr",
    "sample_access_snr",
    "estimate_outage",
    "estimate_capacity",
    "estimate_aber",
    "sample_trace_snrs",
    "run_trace",
]

MIN_SAMPLES = 10_000
BLOCK_SIZE = 1 << 20

LINKS = ("fso", "thz", "hybrid", "access", "e2e")

# Trace burn-in discarded before steady-state tallies.
TRACE_BURN_IN = 1000


@dataclass(frozen=True)
class RngStream:
    """Reproducible substream: identical (seed, index) -> identical samples."""

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence((self.master_seed, self.stream_index))
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, offset: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index + offset)


@dataclass(frozen=True)
class EstimateResult:
    """Point estimate with its 95% interval (Wilson for proportions)."""

    value: float
    stderr: float
    n_samples: int
    ci_lo: float
    ci_hi: float

    @property
    def ci95(self):
        return (self.ci_lo, self.ci_hi)

    def interval(self, z: float) -> tuple:
        """Symmetric z-sigma interval around the estimate."""
        return (self.value - z * self.stderr, self.value + z * self.stderr)


def _wilson(successes: int, n: int, z: float = 1.959963984540054) -> EstimateResult:
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    stderr = math.sqrt(max(p * (1.0 - p), 1.0 / n) / n)
    return EstimateResult(p, stderr, n, min(center - half, p), max(center + half, p))


def _mean_estimate(total: float, total_sq: float, n: int) -> EstimateResult:
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    stderr = math.sqrt(var / n)
    return EstimateResult(mean, stderr, n, mean - 1.959963984540054 * stderr,
                          mean + 1.959963984540054 * stderr)


def _check_n(n: int) -> None:
    if n < MIN_SAMPLES:
        raise DomainError(
            f"sample count {n} too small for a meaningful estimate; "
            f"need at least {MIN_SAMPLES}")


def _pointing_gain(pg: PointingGeometry, rng: np.random.Generator,
                   n: int) -> np.ndarray:
    r = rng.rayleigh(pg.jitter_std_m, n)
    return pg.a0 * np.exp(-2.0 * r * r / pg.w_leq_m ** 2)


def sample_fso_snr(spec: FsoLinkSpec, transmit_snr_db: float,
                   rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw FSO SNRs: Gamma-Gamma scintillation times Rayleigh misalignment."""
    ia = rng.gamma(spec.alpha_f, 1.0 / spec.alpha_f, n)
    ia *= rng.gamma(spec.beta_f, 1.0 / spec.beta_f, n)
    ip = _pointing_gain(spec.pointing, rng, n)
    return spec.delta_tau(transmit_snr_db) * (ia * ip) ** spec.detection_tau


def sample_thz_snr(spec: ThzLinkSpec, transmit_snr_db: float,
                   rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw THz MRC SNRs from the exact N_r-branch alpha-mu sum.

    Branch amplitudes are |h_f| = Omega (G/mu)^(1/alpha) with G ~ Gamma(mu),
    one shared misalignment gain per draw.
    """
    sumsq = np.zeros(n)
    for _ in range(spec.n_rx):
        g = rng.gamma(spec.mu, 1.0, n)
        sumsq += spec.omega ** 2 * (g / spec.mu) ** (2.0 / spec.alpha)
    hp = _pointing_gain(spec.pointing, rng, n)
    return spec.gamma_bar_t(transmit_snr_db) * hp * hp * sumsq


def sample_access_snr(spec: AccessLinkSpec, transmit_snr_db: float,
                      rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw access SNRs from the branch-wise Gamma MRT sum."""
    total = np.zeros(n)
    for _ in range(spec.n_tx):
        total += rng.gamma(spec.m, spec.omega_r / spec.m, n)
    p = 10.0 ** (transmit_snr_db / 10.0)
    return p * spec.p_l * total


def _soft_policy(spec: SystemSpec) -> SoftPolicy:
    pol = spec.policy
    return pol.as_soft() if isinstance(pol, HardPolicy) else pol


def _conditional_error(gamma: np.ndarray, mod: Modulation,
                       snr_factor: float = 1.0) -> np.ndarray:
    err = np.zeros_like(gamma)
    for b in mod.b_list:
        err += sp.erfc(np.sqrt(b * snr_factor * gamma))
    return mod.a * err


@dataclass
class _Tally:
    n: int = 0
    events: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add_events(self, events: int, n: int) -> None:
        self.events += events
        self.n += n

    def add_values(self, values: np.ndarray) -> None:
        self.n += values.size
        self.total += float(np.sum(values))
        self.total_sq += float(np.sum(values * values))


def _iter_blocks(n: int):
    start = 0
    index = 0
    while start < n:
        size = min(BLOCK_SIZE, n - start)
        yield index, size
        start += size
        index += 1


def _trace_blocks(spec: SystemSpec, n: int, seed: int, rho: float = 0.0):
    """Yield (gamma_f, gamma_t, states) chunks of a sequential soft trace."""
    policy = _soft_policy(spec)
    chunks = _snr_chunk_iter(spec, n, rho, RngStream(seed))
    state = SwitchState()
    for gf, gt in chunks:
        states = evaluate_soft_trace(gf, gt, policy, initial=state)
        # carry hysteresis memory across the chunk boundary
        up = gf >= policy.gamma_f_th_u
        down = gf < policy.gamma_f_th_l
        cross = np.where(up)[0], np.where(down)[0]
        last_up = cross[0][-1] if cross[0].size else -1
        last_down = cross[1][-1] if cross[1].size else -1
        if last_up < 0 and last_down < 0:
            below = state.fso_was_below_lower
        else:
            below = last_down > last_up
        state = SwitchState(fso_was_below_lower=below)
        yield gf, gt, states


def _snr_chunk_iter(spec: SystemSpec, n: int, rho: float, stream: RngStream):
    """Per-slot (gamma_F, gamma_T) chunks, i.i.d. or AR(1)-correlated."""
    if rho == 0.0:
        for index, size in _iter_blocks(n):
            rng = stream.child(index).generator()
            gf = sample_fso_snr(spec.fso, spec.transmit_snr_db, rng, size)
            gt = sample_thz_snr(spec.thz, spec.transmit_snr_db, rng, size)
            yield gf, gt
        return
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"correlation rho must lie in [0, 1), got {rho}")
    # Gaussian-copula AR(1): one standard-normal driver per random factor,
    # inverse-CDF to the target marginal, single sequential RNG.
    rng = stream.generator()
    n_drivers = 3 + spec.thz.n_rx + 1
    z_prev = rng.standard_normal(n_drivers)
    scale = math.sqrt(1.0 - rho * rho)
    fso, thz = spec.fso, spec.thz
    for _, size in _iter_blocks(n):
        eps = rng.standard_normal((n_drivers, size))
        z = np.empty_like(eps)
        for d in range(n_drivers):
            z[d], zf = signal.lfilter([scale], [1.0, -rho], eps[d],
                                      zi=[rho * z_prev[d]])
            z_prev[d] = z[d, -1]
        u = sp.ndtr(z)
        np.clip(u, 1e-16, 1.0 - 1e-16, out=u)
        ia = (sp.gammaincinv(fso.alpha_f, u[0]) / fso.alpha_f
              * sp.gammaincinv(fso.beta_f, u[1]) / fso.beta_f)
        r = fso.pointing.jitter_std_m * np.sqrt(-2.0 * np.log1p(-u[2]))
        ip = fso.pointing.a0 * np.exp(-2.0 * r * r / fso.pointing.w_leq_m ** 2)
        gf = (fso.delta_tau(spec.transmit_snr_db)
              * (ia * ip) ** fso.detection_tau)
        sumsq = np.zeros(size)
        for j in range(thz.n_rx):
            g = sp.gammaincinv(thz.mu, u[3 + j])
            sumsq += thz.omega ** 2 * (g / thz.mu) ** (2.0 / thz.alpha)
        rt = thz.pointing.jitter_std_m * np.sqrt(-2.0 * np.log1p(-u[3 + thz.n_rx]))
        hp = thz.pointing.a0 * np.exp(-2.0 * rt * rt / thz.pointing.w_leq_m ** 2)
        gt = spec.thz.gamma_bar_t(spec.transmit_snr_db) * hp * hp * sumsq
        yield gf, gt


def _policy_thresholds(spec: SystemSpec):
    pol = spec.policy
    if isinstance(pol, HardPolicy):
        return pol.gamma_th, pol.gamma_th, pol.gamma_th
    return pol.gamma_f_th_u, pol.gamma_f_th_l, pol.gamma_t_th


def estimate_outage(spec: SystemSpec, n: int, seed: int,
                    link: str = "e2e") -> EstimateResult:
    """Outage frequency of a link or composition at the configured policy.

    Hard policies count per-draw threshold events; soft policies run the
    sequential hysteresis trace and use its steady-state fractions after a
    1000-slot burn-in.
    """
    _check_n(n)
    if link not in LINKS:
        raise DomainError(f"unknown link {link!r}")
    g_u, g_l, g_t = _policy_thresholds(spec)
    is_soft = isinstance(spec.policy, SoftPolicy)
    tally = _Tally()

    if link == "access":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gr = sample_access_snr(spec.access, spec.transmit_snr_db, rng, size)
            tally.add_events(int(np.count_nonzero(gr < spec.gamma_r_th)), size)
        return _wilson(tally.events, tally.n)

    if link == "thz":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gt = sample_thz_snr(spec.thz, spec.transmit_snr_db, rng, size)
            tally.add_events(int(np.count_nonzero(gt < g_t)), size)
        return _wilson(tally.events, tally.n)

    if link == "fso" and not is_soft:
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gf = sample_fso_snr(spec.fso, spec.transmit_snr_db, rng, size)
            tally.add_events(int(np.count_nonzero(gf < g_u)), size)
        return _wilson(tally.events, tally.n)

    if not is_soft:
        # hard hybrid / e2e: memoryless joint events
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gf = sample_fso_snr(spec.fso, spec.transmit_snr_db, rng, size)
            gt = sample_thz_snr(spec.thz, spec.transmit_snr_db, rng, size)
            fail = (gf < g_u) & (gt < g_t)
            if link == "e2e":
                gr = sample_access_snr(spec.access, spec.transmit_snr_db, rng, size)
                fail = fail | (gr < spec.gamma_r_th)
            tally.add_events(int(np.count_nonzero(fail)), size)
        return _wilson(tally.events, tally.n)

    # soft: sequential trace, burn-in discarded
    skip = TRACE_BURN_IN
    for index, (gf, gt, states) in enumerate(
            _trace_blocks(spec, n + TRACE_BURN_IN, seed)):
        size = states.size
        use = states[skip:] if skip else states
        if use.size:
            if link == "fso":
                events = int(np.count_nonzero(use != 0))
            else:
                fail = use == 2
                if link == "e2e":
                    rng = RngStream(seed, 1_000_000 + index).generator()
                    gr = sample_access_snr(spec.access, spec.transmit_snr_db,
                                           rng, size)[skip:]
                    fail = fail | (gr < spec.gamma_r_th)
                events = int(np.count_nonzero(fail))
            tally.add_events(events, use.size)
        skip = max(skip - size, 0)
    return _wilson(tally.events, tally.n)


def estimate_capacity(spec: SystemSpec, n: int, seed: int,
                      link: str = "hybrid") -> EstimateResult:
    """Ergodic capacity estimate matching the truncated-mean compositions.

    Per-slot contributions are log2(1 + Xi gamma_active) on transmitting
    slots and 0 in outage, averaged over all slots, so the hybrid estimate
    targets C^F + P_F C^T (hard) and its hysteresis generalization (soft).
    """
    _check_n(n)
    if link not in LINKS:
        raise DomainError(f"unknown link {link!r}")
    g_u, g_l, g_t = _policy_thresholds(spec)
    xi = _xi_factor(spec.fso.detection_tau)
    tally = _Tally()

    if link == "access":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gr = sample_access_snr(spec.access, spec.transmit_snr_db, rng, size)
            vals = np.where(gr >= spec.gamma_r_th, np.log2(1.0 + gr), 0.0)
            tally.add_values(vals)
        return _mean_estimate(tally.total, tally.total_sq, tally.n)

    if link == "fso":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gf = sample_fso_snr(spec.fso, spec.transmit_snr_db, rng, size)
            vals = np.where(gf >= g_u, np.log2(1.0 + xi * gf), 0.0)
            tally.add_values(vals)
        return _mean_estimate(tally.total, tally.total_sq, tally.n)

    if link == "thz":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gt = sample_thz_snr(spec.thz, spec.transmit_snr_db, rng, size)
            vals = np.where(gt >= g_t, np.log2(1.0 + gt), 0.0)
            tally.add_values(vals)
        return _mean_estimate(tally.total, tally.total_sq, tally.n)

    if link == "e2e":
        hyb = estimate_capacity(spec, n, seed, "hybrid")
        acc = estimate_capacity(spec, n, seed, "access")
        return hyb if hyb.value <= acc.value else acc

    if isinstance(spec.policy, HardPolicy):
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gf = sample_fso_snr(spec.fso, spec.transmit_snr_db, rng, size)
            gt = sample_thz_snr(spec.thz, spec.transmit_snr_db, rng, size)
            vals = np.where(gf >= g_u, np.log2(1.0 + xi * gf),
                            np.where(gt >= g_t, np.log2(1.0 + gt), 0.0))
            tally.add_values(vals)
        return _mean_estimate(tally.total, tally.total_sq, tally.n)

    skip = TRACE_BURN_IN
    for gf, gt, states in _trace_blocks(spec, n + TRACE_BURN_IN, seed):
        vals = np.where(states == 0, np.log2(1.0 + xi * gf),
                        np.where(states == 1, np.log2(1.0 + gt), 0.0))
        if skip:
            vals = vals[skip:]
        if vals.size:
            tally.add_values(vals)
        skip = max(skip - states.size, 0)
    return _mean_estimate(tally.total, tally.total_sq, tally.n)


def estimate_aber(spec: SystemSpec, mod: Modulation, n: int, seed: int,
                  link: str = "hybrid") -> EstimateResult:
    """Semi-analytical ABER: fading-averaged conditional error probability.

    Hybrid estimates apply the non-outage conditioning of the closed form;
    per-link estimates are the plain truncated averages.
    """
    _check_n(n)
    if link not in LINKS:
        raise DomainError(f"unknown link {link!r}")
    g_u, g_l, g_t = _policy_thresholds(spec)
    tally = _Tally()
    transmitted = 0

    if link == "access":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gr = sample_access_snr(spec.access, spec.transmit_snr_db, rng, size)
            vals = np.where(gr >= spec.gamma_r_th,
                            _conditional_error(gr, mod), 0.0)
            tally.add_values(vals)
        return _mean_estimate(tally.total, tally.total_sq, tally.n)

    if link == "fso":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gf = sample_fso_snr(spec.fso, spec.transmit_snr_db, rng, size)
            vals = np.where(gf >= g_u, _conditional_error(gf, mod), 0.0)
            tally.add_values(vals)
        return _mean_estimate(tally.total, tally.total_sq, tally.n)

    if link == "thz":
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gt = sample_thz_snr(spec.thz, spec.transmit_snr_db, rng, size)
            vals = np.where(gt >= g_t, _conditional_error(gt, mod), 0.0)
            tally.add_values(vals)
        return _mean_estimate(tally.total, tally.total_sq, tally.n)

    if link == "e2e":
        hyb = estimate_aber(spec, mod, n, seed, "hybrid")
        acc = estimate_aber(spec, mod, n, seed, "access")
        value = hyb.value + acc.value - 2.0 * hyb.value * acc.value
        stderr = math.hypot((1.0 - 2.0 * acc.value) * hyb.stderr,
                            (1.0 - 2.0 * hyb.value) * acc.stderr)
        z = 1.959963984540054
        return EstimateResult(value, stderr, n, value - z * stderr,
                              value + z * stderr)

    if isinstance(spec.policy, HardPolicy):
        for index, size in _iter_blocks(n):
            rng = RngStream(seed, index).generator()
            gf = sample_fso_snr(spec.fso, spec.transmit_snr_db, rng, size)
            gt = sample_thz_snr(spec.thz, spec.transmit_snr_db, rng, size)
            fso_on = gf >= g_u
            thz_on = ~fso_on & (gt >= g_t)
            vals = np.where(fso_on, _conditional_error(gf, mod),
                            np.where(thz_on, _conditional_error(gt, mod), 0.0))
            transmitted += int(np.count_nonzero(fso_on | thz_on))
            tally.add_values(vals)
    else:
        skip = TRACE_BURN_IN
        for gf, gt, states in _trace_blocks(spec, n + TRACE_BURN_IN, seed):
            vals = np.where(states == 0, _conditional_error(gf, mod),
                            np.where(states == 1, _conditional_error(gt, mod),
                                     0.0))
            if skip:
                vals = vals[skip:]
                st = states[skip:]
            else:
                st = states
            if vals.size:
                transmitted += int(np.count_nonzero(st != 2))
                tally.add_values(vals)
            skip = max(skip - states.size, 0)
    est = _mean_estimate(tally.total, tally.total_sq, tally.n)
    if transmitted == 0:
        return est
    cond = 1.0 / (transmitted / tally.n)
    z = 1.959963984540054
    value = est.value * cond
    stderr = est.stderr * cond
    return EstimateResult(value, stderr, est.n_samples,
                          value - z * stderr, value + z * stderr)


def sample_trace_snrs(spec: SystemSpec, n_slots: int, rho: float,
                      seed: int) -> tuple:
    """Full per-slot (gamma_F, gamma_T) arrays for paired policy studies."""
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"correlation rho must lie in [0, 1), got {rho}")
    gfs, gts = [], []
    for gf, gt in _snr_chunk_iter(spec, n_slots, rho, RngStream(seed)):
        gfs.append(gf)
        gts.append(gt)
    return np.concatenate(gfs), np.concatenate(gts)


def run_trace(spec: SystemSpec, n_slots: int, rho: float, seed: int,
              policy: Optional[SoftPolicy] = None) -> tuple:
    """Sequential switching trace: (gamma_f, gamma_t, states int8 array).

    States are coded 0 = FSO, 1 = THz, 2 = outage.  ``rho`` is the AR(1)
    coefficient of the Gaussian-copula drivers; marginals are preserved
    exactly for any rho.
    """
    gf, gt = sample_trace_snrs(spec, n_slots, rho, seed)
    pol = policy if policy is not None else _soft_policy(spec)
    states = evaluate_soft_trace(gf, gt, pol)
    return gf, gt, states
