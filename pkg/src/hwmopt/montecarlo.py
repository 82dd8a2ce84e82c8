"""Monte Carlo oracle for the NAV dynamics with a fee-dependent drift.

The log-NAV is advanced with a log-Euler step whose drift drops by the
incentive fee whenever the NAV sits above the (possibly accruing) mark.
Paths are produced in fixed-size blocks, each with its own Philox stream
spawned from the seed, so results do not depend on how blocks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .model import FundParameters, HwmMode, check, derive_coefficients


class Payoff(str, Enum):
    CALL = "call"
    PUT = "put"
    FORWARD = "forward"


class SimulationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class McConfig:
    paths: int = 100_000
    steps_per_year: int = 2000
    seed: int = 271828
    antithetic: bool = True
    block_paths: int = 16_384
    workers: int = 1

    def __post_init__(self):
        if self.paths < 1 or self.steps_per_year < 1 or self.block_paths < 1:
            raise ValueError("paths, steps_per_year and block_paths must be positive")
        if self.antithetic and self.paths % 2:
            raise ValueError("antithetic sampling needs an even number of paths")


@dataclass(frozen=True)
class PathBatchStats:
    price_mean: float
    std_error: float
    occupation_above_fraction: float
    barrier_hit_fraction: float
    paths: int

    def z_score(self, reference: float) -> float:
        return abs(self.price_mean - reference) / self.std_error if self.std_error > 0 else math.inf


def _block_sizes(config: McConfig) -> list[int]:
    # number of independent draws per block (pairs when antithetic)
    draws = config.paths // 2 if config.antithetic else config.paths
    per_block = max(1, config.block_paths // 2 if config.antithetic else config.block_paths)
    full, rest = divmod(draws, per_block)
    return [per_block] * full + ([rest] if rest else [])


def _grid(horizon: float, steps_per_year: int) -> tuple[int, float]:
    n = max(1, math.ceil(horizon * steps_per_year - 1e-9))
    return n, horizon / n


def _simulate_block(params: FundParameters, obs_steps: Sequence[int], n_steps: int, dt: float,
                    draws: int, rng: np.random.Generator, antithetic: bool, track_survival: bool = False):
    """Log-NAV at the observation steps plus per-path occupation and hit statistics.

    With ``track_survival`` the log-probability that the continuous path has not
    touched the mark is accumulated with the Brownian-bridge crossing formula
    and returned for each observation step.
    """
    sigma = params.volatility
    fee = params.mean_return * params.incentive_fraction
    base = (params.rate + params.excess_return - params.management_fee - 0.5 * sigma**2) * dt
    fee_dt = fee * dt
    vol = sigma * math.sqrt(dt)
    log_h0 = math.log(params.high_water_mark)
    mark_drift = params.rate if HwmMode(params.hwm_mode) is HwmMode.ACCRUING else 0.0
    t0 = params.valuation_offset

    width = 2 * draws if antithetic else draws
    x = np.full(width, math.log(params.spot))
    above = x > log_h0 + mark_drift * t0
    start_above = above.copy()
    start_on = np.isclose(x, log_h0 + mark_drift * t0, rtol=0.0, atol=1e-14)
    hit = start_on.copy()
    occupied = np.zeros(width)
    out = np.empty((len(obs_steps), width))
    log_survival = np.zeros((len(obs_steps), width)) if track_survival else None
    survival = np.where(start_on, -np.inf, 0.0) if track_survival else None
    bridge = 2.0 / (sigma**2 * dt)
    targets = {step: i for i, step in enumerate(obs_steps)}
    z = np.empty(width)

    for i in range(n_steps):
        normals = rng.standard_normal(draws)
        if antithetic:
            z[:draws] = normals
            np.negative(normals, out=z[draws:])
        else:
            z = normals
        occupied += above
        if track_survival:
            gap_before = x - (log_h0 + mark_drift * (t0 + i * dt))
        x += base - fee_dt * above + vol * z
        level = log_h0 + mark_drift * (t0 + (i + 1) * dt)
        if track_survival:
            prod = gap_before * (x - level)
            with np.errstate(divide="ignore"):
                survival += np.where(prod > 0, np.log1p(-np.exp(-bridge * np.maximum(prod, 0.0))), -np.inf)
        above = x > level
        hit |= above != start_above
        idx = targets.get(i + 1)
        if idx is not None:
            out[idx] = x
            if track_survival:
                log_survival[idx] = survival
    if not np.all(np.isfinite(x)):
        raise SimulationError("non-finite log-NAV in simulation")
    return out, occupied / n_steps, hit, log_survival


def simulate_grid(params: FundParameters, strikes: Iterable[float], maturities: Iterable[float],
                  payoff: Payoff | str = Payoff.CALL, config: McConfig = McConfig(),
                  no_touch: bool = False) -> dict[tuple[float, float], PathBatchStats]:
    """Price every ``(strike, maturity)`` pair on one set of paths.

    Maturities are absolute dates, like :attr:`FundParameters.maturity`. In
    accruing mode the strike ``K`` pays against ``K exp(r T)``. ``no_touch``
    restricts the payoff to paths that never reach the mark before maturity.
    """
    check(params)
    payoff = Payoff(payoff)
    strikes = [float(k) for k in strikes]
    maturities = sorted(float(m) for m in maturities)
    t0 = params.valuation_offset
    horizon = maturities[-1] - t0
    n_steps, dt = _grid(horizon, config.steps_per_year)
    obs_steps = [round((m - t0) / dt) for m in maturities]
    if any(abs(k * dt - (m - t0)) > 1e-9 for k, m in zip(obs_steps, maturities)) or min(obs_steps) < 1:
        raise ValueError("maturities must fall on the simulation grid and lie after the valuation date")

    accruing = HwmMode(params.hwm_mode) is HwmMode.ACCRUING
    disc = np.array([math.exp(-params.rate * (m - t0)) for m in maturities])
    strike_grid = np.array([[k * (math.exp(params.rate * m) if accruing else 1.0) for k in strikes] for m in maturities])

    sizes = _block_sizes(config)
    streams = np.random.SeedSequence(config.seed).spawn(len(sizes))

    def run(block):
        draws, seq = block
        rng = np.random.Generator(np.random.Philox(seq))
        logs, occ, hit, log_surv = _simulate_block(params, obs_steps, n_steps, dt, draws, rng, config.antithetic,
                                                   no_touch)
        spot = np.exp(logs)[:, None, :]
        if payoff is Payoff.CALL:
            values = np.maximum(spot - strike_grid[:, :, None], 0.0)
        elif payoff is Payoff.PUT:
            values = np.maximum(strike_grid[:, :, None] - spot, 0.0)
        else:
            values = np.broadcast_to(spot, (len(maturities), len(strikes), spot.shape[2]))
        values = values * disc[:, None, None]
        if no_touch:
            values = values * np.exp(log_surv)[:, None, :]
        if config.antithetic:
            values = 0.5 * (values[:, :, :draws] + values[:, :, draws:])
        return values.sum(axis=2), (values**2).sum(axis=2), occ.sum(), hit.sum(), occ.size

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(run, zip(sizes, streams)))
    else:
        results = [run(b) for b in zip(sizes, streams)]

    n = sum(sizes)
    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    occ = sum(r[2] for r in results) / sum(r[4] for r in results)
    hits = sum(r[3] for r in results) / sum(r[4] for r in results)
    mean = total / n
    var = np.maximum(total_sq / n - mean**2, 0.0) * n / max(n - 1, 1)
    se = np.sqrt(var / n)

    out = {}
    for i, m in enumerate(maturities):
        for j, k in enumerate(strikes):
            out[(k, m)] = PathBatchStats(float(mean[i, j]), float(se[i, j]), float(occ), float(hits), config.paths)
    return out


def simulate_price(params: FundParameters, payoff: Payoff | str = Payoff.CALL, config: McConfig = McConfig()) -> PathBatchStats:
    """Discounted payoff estimate for the contract described by ``params``."""
    strike = params.strike
    return simulate_grid(params, [strike], [params.maturity], payoff, config)[(float(strike), float(params.maturity))]


@dataclass(frozen=True)
class DensityCheck:
    mean: float
    std_error: float
    occupation_identity_residual: float
    mean_local_time: float
    paths: int

    @property
    def z_score(self) -> float:
        return abs(self.mean - 1.0) / self.std_error


def simulate_radon_nikodym_check(params: FundParameters, config: McConfig = McConfig(), t: float | None = None,
                                 local_time: str = "band") -> DensityCheck:
    """Estimate the expectation of the measure-change density at ``t`` under the fee-free measure.

    ``local_time="band"`` uses ``(1/2eps) * time within eps of the level`` with
    ``eps = sqrt(dt)``, which is biased low by O(sqrt(dt)). ``"tanaka"`` uses
    the discrete Tanaka identity instead, which makes the sampled density an
    exact discrete martingale. Either way the mean should be one.
    """
    if local_time not in ("band", "tanaka"):
        raise ValueError(f"unknown local time estimator {local_time!r}")
    check(params)
    t = params.time_to_maturity if t is None else t
    if not t > 0:
        raise ValueError("t must be positive")
    coeffs = derive_coefficients(params)
    b, lam, a = coeffs.b, coeffs.lam, coeffs.d_h
    n_steps, dt = _grid(t, config.steps_per_year)
    eps = math.sqrt(dt)
    root_dt = math.sqrt(dt)

    sizes = _block_sizes(config)
    streams = np.random.SeedSequence(config.seed).spawn(len(sizes))
    sums = np.zeros(2)
    worst_identity = 0.0
    local_total = 0.0
    for draws, seq in zip(sizes, streams):
        rng = np.random.Generator(np.random.Philox(seq))
        width = 2 * draws if config.antithetic else draws
        w = np.zeros(width)
        local = np.zeros(width)
        above = np.zeros(width)
        below = np.zeros(width)
        for _ in range(n_steps):
            up = w > a
            above += up
            below += ~up
            normals = rng.standard_normal(draws)
            dw = root_dt * (np.concatenate([normals, -normals]) if config.antithetic else normals)
            if local_time == "band":
                local += np.abs(w - a) <= eps
            else:
                local -= up * dw
            w += dw
        if local_time == "band":
            local *= dt / (2.0 * eps)
        else:
            local = 2.0 * (np.maximum(w - a, 0.0) - max(-a, 0.0) + local)
        above *= dt
        below *= dt
        worst_identity = max(worst_identity, float(np.max(np.abs(above + below - t))))
        z = np.exp(2.0 * lam * max(-a, 0.0) + b * w - 2.0 * lam * np.maximum(w - a, 0.0)
                   + lam * local - coeffs.alpha_plus * above - coeffs.alpha_minus * below)
        if config.antithetic:
            z = 0.5 * (z[:draws] + z[draws:])
        sums += (z.sum(), (z**2).sum())
        local_total += float(local.sum())
    n = sum(sizes)
    mean = sums[0] / n
    var = max(sums[1] / n - mean**2, 0.0) * n / max(n - 1, 1)
    return DensityCheck(float(mean), math.sqrt(var / n), worst_identity,
                        local_total / (n * (2 if config.antithetic else 1)), config.paths)
