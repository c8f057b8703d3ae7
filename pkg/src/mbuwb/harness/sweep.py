"""End-to-end BER sweeps: channel draw, CSI, beacon exchange, allocation, link BER.

Work is split per SNR point. Every random stream is keyed by the master seed
and the point/user/epoch indices, so results do not depend on how points are
scheduled across worker processes.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import allocator
from .. import channel_model as chm
from ..link_abstraction import (
    CalibrationCache,
    LambdaTable,
    csi_from_responses,
    user_lambdas,
)
from ..mac_layer import DeviceState, beacon_exchange, build_superframe, weighted_users
from ..phy.link import BerPoint, band_responses, simulate_frames
from .scenario import CROSS_LAYER, Scenario

log = logging.getLogger(__name__)

CHANNEL_STREAM, BASELINE_STREAM, NOISE_STREAM, CALIBRATION_STREAM = range(4)
CALIBRATION_SNR_GRID = np.arange(-2.0, 22.0, 1.0)
CALIBRATION_REALIZATIONS = 20


@dataclass
class BerCurve:
    label: str
    points: list
    metadata: dict = field(default_factory=dict)

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    @property
    def censored(self) -> int:
        return sum(p.censored for p in self.points)


def stream_seed(*key) -> int:
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1, np.uint64)[0])


def user_label(profile) -> str:
    return f"u{profile.user_id}-{profile.qos_class}@{profile.mcs.label}"


def baseline_label(mcs) -> str:
    return f"tfc@{mcs.label}"


def resolve_lambdas(s: Scenario, cache_dir=None, lambdas=None):
    """Lambda per MCS: explicit argument, scenario override, or cached calibration."""
    if lambdas is not None:
        return lambdas
    if s.lambda_override is not None:
        return float(s.lambda_override)
    cache = CalibrationCache(cache_dir or ".mbuwb-cache")
    params = chm.get_params(s.channel)

    def ensemble():
        return [
            chm.generate_realization(params, stream_seed(s.seed, CALIBRATION_STREAM, i))
            for i in range(CALIBRATION_REALIZATIONS)
        ]

    table = LambdaTable()
    for p in s.profiles():
        if p.mcs not in table:
            table.set(p.mcs, cache.lam(p.mcs, ensemble, CALIBRATION_SNR_GRID, seed=s.seed, frames=10))
    return table


@dataclass
class PointResult:
    counts: dict  # label -> [errors, bits]
    epochs: int
    superframes: int
    shared_superframes: dict  # user_id -> count
    served_bits: dict  # user_id -> total payload bits over all superframes
    checked_allocations: int
    assignments: Counter = field(default_factory=Counter)  # Assignment -> superframes


def _satisfied(counts, s: Scenario) -> bool:
    return all(e >= s.min_errors or b >= s.max_bits for e, b in counts.values())


def simulate_point(s: Scenario, lambdas, snr_index: int, include_cross_layer: bool = True,
                   include_baseline: bool | None = None) -> PointResult:
    """All epochs of one SNR point (one worker's unit of work)."""
    snr = float(s.snr_grid[snr_index])
    params = chm.get_params(s.channel)
    profiles = weighted_users(s.profiles(), s.k)
    ids = [p.user_id for p in profiles]
    weights = [p.weight for p in profiles]
    esn0 = [p.mcs.esn0_db(snr, s.snr_axis) for p in profiles]
    lams = user_lambdas(profiles, lambdas) if s.mode == CROSS_LAYER and include_cross_layer else None
    if include_baseline is None:
        include_baseline = s.baseline

    labels = []
    if include_cross_layer:
        labels += [user_label(p) for p in profiles]
    if include_baseline and s.mode == CROSS_LAYER:
        labels.append(baseline_label(s.baseline_mcs))
    counts = {lab: [0, 0] for lab in labels}
    rngs = {lab: np.random.default_rng(stream_seed(s.seed, NOISE_STREAM, snr_index, i))
            for i, lab in enumerate(labels)}
    credit = {uid: Fraction(0) for uid in ids}
    shared = {uid: 0 for uid in ids}
    served = {uid: Fraction(0) for uid in ids}
    superframes = checked = 0
    seen = Counter()
    epoch = 0

    while epoch < s.realizations or not _satisfied(counts, s):
        if include_cross_layer:
            responses = [
                band_responses(
                    chm.generate_realization(params, stream_seed(s.seed, CHANNEL_STREAM, uid, epoch)),
                    s.shadowing,
                )
                for uid in ids
            ]
            if s.mode == CROSS_LAYER:
                csi = csi_from_responses(ids, responses, esn0, lams)
                for _ in range(s.superframes_per_realization):
                    # the allocation is refreshed at every superframe boundary
                    devices = [DeviceState(p, csi.values[i]) for i, p in enumerate(profiles)]
                    assignment = beacon_exchange(devices, csi, s.w_mac, s.w_phy, s.al_mode).assignment
                    direct = allocator.negotiate(
                        allocator.allocation_levels(ids, weights, csi.values, s.w_mac, s.w_phy, s.al_mode)
                    )
                    if direct != assignment:
                        raise RuntimeError("beacon exchange diverged from the allocator")
                    checked += 1
                    seen[assignment] += 1
                    sf = build_superframe(assignment, s.bp_len)
                    superframes += 1
                    for i, p in enumerate(profiles):
                        shared[p.user_id] += assignment.is_shared(p.user_id)
                        served[p.user_id] += sf.served_bits(p.user_id, p.mcs)
                        credit[p.user_id] += s.frames_per_superframe * sf.time_fraction(p.user_id)
                        n = math.floor(credit[p.user_id])
                        credit[p.user_id] -= n
                        if n:
                            lab = user_label(p)
                            e, b = simulate_frames(p.mcs, responses[i], assignment.band_of(p.user_id),
                                                   esn0[i], n, rngs[lab])
                            counts[lab][0] += e
                            counts[lab][1] += b
            else:
                n = s.frames_per_superframe * s.superframes_per_realization
                for i, p in enumerate(profiles):
                    lab = user_label(p)
                    e, b = simulate_frames(p.mcs, responses[i], "tfc", esn0[i], n, rngs[lab])
                    counts[lab][0] += e
                    counts[lab][1] += b
        if include_baseline and s.mode == CROSS_LAYER:
            lab = baseline_label(s.baseline_mcs)
            r = chm.generate_realization(params, stream_seed(s.seed, BASELINE_STREAM, 0, epoch))
            n = s.frames_per_superframe * s.superframes_per_realization
            e, b = simulate_frames(s.baseline_mcs, band_responses(r, s.shadowing), "tfc",
                                   s.baseline_mcs.esn0_db(snr, s.snr_axis), n, rngs[lab])
            counts[lab][0] += e
            counts[lab][1] += b
        epoch += 1
    return PointResult(counts, epoch, superframes, shared, served, checked, seen)


def _run_points(s: Scenario, lambdas, jobs: int, **kw) -> list[PointResult]:
    idx = range(len(s.snr_grid))
    if jobs <= 1:
        return [simulate_point(s, lambdas, i, **kw) for i in idx]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(simulate_point, s, lambdas, i, **kw) for i in idx]
        return [f.result() for f in futures]


def run_ber_sweep(
    s: Scenario,
    lambdas=None,
    jobs: int = 1,
    cache_dir=None,
    include_cross_layer: bool = True,
    include_baseline: bool | None = None,
    return_points: bool = False,
):
    """One BerCurve per user (plus the TFC baseline when configured).

    Points short of ``min_errors`` at ``max_bits`` are kept and flagged censored.
    """
    lambdas = resolve_lambdas(s, cache_dir, lambdas) if include_cross_layer else lambdas
    results = _run_points(s, lambdas, jobs, include_cross_layer=include_cross_layer,
                          include_baseline=include_baseline)
    meta = {"scenario": s.digest(), "seed": s.seed}
    curves = []
    for lab in results[0].counts:
        points = [
            BerPoint(float(snr), r.counts[lab][0], r.counts[lab][1], r.counts[lab][0] < s.min_errors)
            for snr, r in zip(s.snr_grid, results)
        ]
        curves.append(BerCurve(lab, points, dict(meta)))
    curves.sort(key=lambda c: c.label)
    return (curves, results) if return_points else curves


def snr_at_ber(curve: BerCurve, target: float):
    """First SNR where the curve crosses ``target``, log-linear interpolation.

    Zero-error points count as ``0.5 / bits_tested``. Returns None when the
    curve never crosses the target inside its grid.
    """
    pts = curve.points
    for p0, p1 in zip(pts, pts[1:]):
        b0 = max(p0.ber, 0.5 / p0.bits_tested)
        b1 = max(p1.ber, 0.5 / p1.bits_tested)
        if b0 >= target >= b1 and b0 > b1:
            y0, y1 = np.log10(b0), np.log10(b1)
            return float(p0.snr_db + (np.log10(target) - y0) * (p1.snr_db - p0.snr_db) / (y1 - y0))
    return None


def gain_db(curve: BerCurve, baseline: BerCurve, target: float):
    """Horizontal SNR gap (baseline minus curve) at ``target``; positive is better."""
    a, b = snr_at_ber(curve, target), snr_at_ber(baseline, target)
    if a is None or b is None:
        return None
    return b - a


@dataclass(frozen=True)
class BalanceRow:
    ratio: float
    hard_gain_db: float | None
    all_users_gain_db: float | None
    per_user: tuple  # (label, gain_db) for every cross-layer user


def run_balance_sweep(s: Scenario, ratios=None, target: float = 1e-3, lambdas=None,
                      jobs: int = 1, cache_dir=None):
    """Average hard-QoS gain over the TFC baseline for each W_MAC/W_PHY ratio.

    ``w_phy`` is held at one and ``w_mac = ratio``. Channel and noise streams are
    shared across ratios, so only the allocation changes between rows.
    """
    ratios = sorted(float(r) for r in (ratios if ratios is not None else s.ratios))
    if not ratios:
        raise ValueError("no ratios to sweep")
    lambdas = resolve_lambdas(s, cache_dir, lambdas)
    baseline = run_ber_sweep(s, lambdas, jobs, include_cross_layer=False, include_baseline=True)[0]
    rows = []
    for ratio in ratios:
        curves = run_ber_sweep(s.with_(w_mac=ratio, w_phy=1.0), lambdas, jobs, include_baseline=False)
        gains = [(c.label, gain_db(c, baseline, target)) for c in curves]
        hard = [g for lab, g in gains if "-hard@" in lab]
        rows.append(BalanceRow(ratio, _mean(hard), _mean([g for _, g in gains]), tuple(gains)))
    return rows


def _mean(values):
    values = list(values)
    if not values or any(v is None for v in values):
        return None
    return float(np.mean(values))
