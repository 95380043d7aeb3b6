"""Monte Carlo estimators that mirror the closed forms sample by sample.

These simulators draw the actual per-sample complex Gaussians (as pairs
of real ones) rather than the aggregated Gamma laws, so they exercise
the full modeling chain and act as independent oracles for the analytic
module. Streams are addressed through PCG64 jumps, which makes every
estimate reproducible for a given (seed, stream) pair and lets sweeps
hand out disjoint substreams without coordination.
"""

from dataclasses import dataclass

import numpy as np

# keeps peak scratch memory near 50 MB regardless of block size
_CHUNK_FLOATS = 6_000_000


@dataclass(frozen=True)
class RngSpec:
    """Addresses one reproducible random stream.

    seed selects the PCG64 base state; stream applies that many jumps,
    each advancing the generator by 2^64 draws, so distinct streams
    never overlap.
    """

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned int, got {self.seed!r}")
        if int(self.stream) < 0:
            raise ValueError(f"stream must be >= 0, got {self.stream!r}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed).jumped(self.stream))


@dataclass(frozen=True)
class EstimateWithError:
    """Sample mean plus its standard error (sample std over sqrt(trials))."""

    mean: float
    std_error: float
    trials: int


def _check_trials(trials: int) -> int:
    trials = int(trials)
    if trials < 100:
        raise ValueError(f"need at least 100 trials for a standard error, got {trials}")
    return trials


def _binomial_estimate(hits: int, trials: int) -> EstimateWithError:
    phat = hits / trials
    se = np.sqrt(phat * (1.0 - phat) / (trials - 1))
    return EstimateWithError(mean=float(phat), std_error=float(se), trials=trials)


def _chunks(total: int, size: int):
    done = 0
    while done < total:
        n = min(size, total - done)
        yield n
        done += n


def _sq_rows(z: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", z, z)


def simulate_detector(
    params, trials: int, rng: RngSpec
) -> tuple[EstimateWithError, EstimateWithError]:
    """Estimate (false alarm, miss detection) probabilities by sampling.

    Each trial draws a full block of 2qL real Gaussians for the
    noise-only statistic, then a fresh warden gain g ~ Exp(omega_e) and
    block for the signal-present statistic. Complex samples of variance
    v appear as real pairs of variance v/2.
    """
    trials = _check_trials(trials)
    gen = rng.generator()
    q, k, L = params.q, params.k, params.L
    s2 = params.sigma0_sq
    rho = params.rho
    thr = params.effective_threshold
    chunk = max(1, _CHUNK_FLOATS // (2 * q * L))
    fa_hits = 0
    md_hits = 0
    for n in _chunks(trials, chunk):
        z = gen.standard_normal((n, 2 * q * L))
        t0 = 0.5 * s2 * _sq_rows(z)
        fa_hits += int(np.count_nonzero(t0 > thr))

        g = gen.exponential(params.omega_e, n)
        zs = gen.standard_normal((n, 2 * k * L))
        t1 = 0.5 * (rho * g + s2) * _sq_rows(zs)
        if q > k:
            zn = gen.standard_normal((n, 2 * (q - k) * L))
            t1 += 0.5 * s2 * _sq_rows(zn)
        md_hits += int(np.count_nonzero(t1 <= thr))
    return _binomial_estimate(fa_hits, trials), _binomial_estimate(md_hits, trials)


def detector_statistic_samples(
    params, trials: int, rng: RngSpec, signal: bool = False, g: float | None = None
) -> np.ndarray:
    """Raw draws of the block energy statistic, for distribution tests.

    With signal=False the samples follow the noise-only law
    Gamma(qL, sigma0_sq). With signal=True the warden gain is drawn per
    trial unless a fixed g is supplied.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    gen = rng.generator()
    q, k, L = params.q, params.k, params.L
    s2 = params.sigma0_sq
    chunk = max(1, _CHUNK_FLOATS // (2 * q * L))
    out = np.empty(trials)
    pos = 0
    for n in _chunks(trials, chunk):
        if not signal:
            z = gen.standard_normal((n, 2 * q * L))
            out[pos : pos + n] = 0.5 * s2 * _sq_rows(z)
        else:
            gv = np.full(n, g, dtype=float) if g is not None else gen.exponential(
                params.omega_e, n
            )
            zs = gen.standard_normal((n, 2 * k * L))
            t = 0.5 * (params.rho * gv + s2) * _sq_rows(zs)
            if q > k:
                zn = gen.standard_normal((n, 2 * (q - k) * L))
                t = t + 0.5 * s2 * _sq_rows(zn)
            out[pos : pos + n] = t
        pos += n
    return out


def simulate_rtp(params, trials: int, rng: RngSpec) -> EstimateWithError:
    """Estimate the reliable transmission probability by sampling gains."""
    trials = _check_trials(trials)
    gen = rng.generator()
    if params.gamma_u == 0.0:
        need = 0.0
    elif params.p_b == 0.0:
        need = np.inf
    else:
        need = (
            params.gamma_u
            * params.k
            * params.sigma0_sq
            / (params.m * params.p_b)
        )
    hits = 0
    for n in _chunks(trials, 4_000_000):
        h = gen.exponential(params.omega_u, n)
        hits += int(np.count_nonzero(h >= need))
    return _binomial_estimate(hits, trials)


def simulate_rate(params, p: float, trials: int, rng: RngSpec) -> EstimateWithError:
    """Estimate the ergodic rate E[log2(1 + beta h)] at transmit power p."""
    if not p > 0.0:
        raise ValueError(f"transmit power must be > 0, got {p!r}")
    trials = _check_trials(trials)
    gen = rng.generator()
    beta = params.m * p / (params.k * params.sigma0_sq)
    total = 0.0
    total_sq = 0.0
    for n in _chunks(trials, 4_000_000):
        h = gen.exponential(params.omega_u, n)
        r = np.log2(1.0 + beta * h)
        total += float(r.sum())
        total_sq += float(r @ r)
    mean = total / trials
    var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    return EstimateWithError(
        mean=mean, std_error=float(np.sqrt(var / trials)), trials=trials
    )
