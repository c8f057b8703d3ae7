"""Exponential effective-SINR mapping (EESM) and its calibration.

Effective SINR is computed in linear units and exposed in dB at the CSI
boundary. The interference term is zero: users on disjoint sub-bands do not
interfere.
"""

from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .errors import ArgumentError, ParameterError
from .phy.link import FRAMES_PER_BATCH, band_responses, simulate_frames
from .phy.mcs import DATA_TONES, McsConfig, get_mcs

log = logging.getLogger(__name__)

LAMBDA_BOUNDS = (0.1, 100.0)
DEFAULT_AWGN_GRID = np.arange(-2.0, 24.0 + 1e-9, 0.5)
BER_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class SinrVector:
    values: np.ndarray
    band: int | None = None
    user_id: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0 or np.any(v < 0):
            raise ArgumentError("SINR vector must be a nonempty 1-D array of values >= 0")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SubbandCsi:
    """Effective SINR in dB, ``values[u, b]`` for user row u and band b+1."""

    values: np.ndarray
    user_ids: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != len(self.user_ids):
            raise ArgumentError("CSI matrix must be N_u x N_b with one row per user id")
        if not np.all(np.isfinite(v)):
            raise ArgumentError("CSI entries must be finite")
        object.__setattr__(self, "values", v)

    @property
    def num_users(self) -> int:
        return self.values.shape[0]

    @property
    def num_bands(self) -> int:
        return self.values.shape[1]

    def row(self, user_id) -> np.ndarray:
        return self.values[self.user_ids.index(user_id)]


def subcarrier_sinr(h, esn0_db: float, band=None, user_id=None) -> SinrVector:
    """``|H_i|^2 * Es/N0`` per tone."""
    h = np.asarray(h)
    return SinrVector(np.abs(h) ** 2 * 10.0 ** (esn0_db / 10.0), band, user_id)


def effective_sinr(s, lam: float) -> float:
    """EESM compression, ``-lam * ln(mean(exp(-SINR_i / lam)))``, linear units."""
    if not lam > 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    values = s.values if isinstance(s, SinrVector) else np.asarray(s, dtype=float)
    if values.size == 0:
        raise ArgumentError("effective_sinr needs at least one SINR value")
    return float(-lam * (logsumexp(-values / lam) - np.log(values.size)))


def to_db(x):
    return 10.0 * np.log10(np.maximum(x, 1e-30))


@dataclass(frozen=True, eq=False)
class AwgnReference:
    """Monte-Carlo BER versus Es/N0 on the identity channel, one MCS."""

    mcs_rate: float
    snr_db: np.ndarray
    ber: np.ndarray  # isotonic (non-increasing) cleaned
    bit_errors: np.ndarray
    bits_tested: np.ndarray

    def ber_at(self, snr_db):
        """Log-domain linear interpolation, clamped at the grid ends."""
        logb = np.log10(np.maximum(self.ber, BER_FLOOR))
        return 10.0 ** np.interp(snr_db, self.snr_db, logb)

    def snr_at(self, ber) -> float:
        """Inverse lookup: smallest Es/N0 (dB) reaching ``ber``."""
        logb = np.log10(np.maximum(self.ber, BER_FLOOR))
        target = np.log10(ber)
        # logb is non-increasing; np.interp wants increasing x
        return float(np.interp(-target, -logb, self.snr_db))

    def dumps(self) -> str:
        return "".join(
            f"{s:.4f} {b:.6e} {e} {n}\n"
            for s, b, e, n in zip(self.snr_db, self.ber, self.bit_errors, self.bits_tested)
        )

    @classmethod
    def loads(cls, mcs_rate: float, text: str) -> "AwgnReference":
        rows = np.array([[float(x) for x in line.split()] for line in text.splitlines() if line.strip()])
        return cls(mcs_rate, rows[:, 0], rows[:, 1], rows[:, 2].astype(int), rows[:, 3].astype(int))


def awgn_reference(
    mcs,
    snr_grid=DEFAULT_AWGN_GRID,
    seed: int = 0,
    min_errors: int = 500,
    max_bits: int = 2_000_000,
    coded: bool = True,
) -> AwgnReference:
    """Simulate the AWGN BER curve of ``mcs`` on ``snr_grid``.

    Once two consecutive points show no errors within ``max_bits`` the
    remaining (higher) points are set to zero without simulation.
    """
    mcs = get_mcs(mcs)
    grid = np.sort(np.asarray(snr_grid, dtype=float))
    flat = np.ones((3, DATA_TONES), dtype=complex)
    errors = np.zeros(grid.size, dtype=int)
    bits = np.zeros(grid.size, dtype=int)
    clean_run = 0
    for i, snr in enumerate(grid):
        if clean_run >= 2:
            break
        rng = np.random.default_rng([seed, i])
        while errors[i] < min_errors and bits[i] < max_bits:
            e, b = simulate_frames(mcs, flat, 1, snr, FRAMES_PER_BATCH, rng, coded)
            errors[i] += e
            bits[i] += b
        clean_run = clean_run + 1 if errors[i] == 0 else 0
    raw = np.divide(errors, bits, out=np.zeros(grid.size), where=bits > 0)
    ber = np.minimum.accumulate(raw)
    return AwgnReference(float(mcs.data_rate), grid, ber, errors, bits)


def _ensemble_bers(mcs, ensemble, snr_grid, frames, seed):
    """Simulated BER for every (realization, band, snr); plus the SINR vectors."""
    rows = []
    for r_idx, r in enumerate(ensemble):
        responses = band_responses(r)
        for b in range(3):
            gains = np.abs(responses[b]) ** 2
            for s_idx, snr in enumerate(snr_grid):
                rng = np.random.default_rng([seed, r_idx, b, s_idx])
                e, n = simulate_frames(mcs, responses, b + 1, snr, frames, rng)
                rows.append((gains, snr, e, n))
    return rows


def _objective(lam, rows, reference):
    err = []
    for gains, snr, e, n in rows:
        eff = effective_sinr(gains * 10 ** (snr / 10), lam)
        pred = reference.ber_at(to_db(eff))
        err.append(np.log10(max(e / n, BER_FLOOR)) - np.log10(max(pred, BER_FLOOR)))
    return float(np.mean(np.square(err)))


@dataclass
class Calibration:
    lam: float
    objective: float
    objective_at_one: float
    num_points: int
    degenerate: bool = False


def calibrate_lambda(
    mcs,
    ensemble,
    snr_grid,
    reference: AwgnReference | None = None,
    seed: int = 0,
    frames: int = 20,
    ber_window=(1e-5, 0.2),
) -> Calibration:
    """Fit the EESM scaling factor of ``mcs`` over a channel ensemble.

    Minimises the mean squared log10-BER mismatch between simulated BER and
    ``reference(effective_sinr)`` over ensemble x bands x ``snr_grid``; points
    whose simulated BER is outside ``ber_window`` carry no information and
    are dropped. A bounded golden-section search runs in log(lambda).
    """
    mcs = get_mcs(mcs)
    ensemble = list(ensemble)
    if not ensemble:
        raise ArgumentError("calibration needs a nonempty ensemble")
    if reference is None:
        reference = awgn_reference(mcs, seed=seed)
    gains_all = [np.abs(band_responses(r)) ** 2 for r in ensemble]
    if all(np.ptp(g) <= 1e-9 * max(np.max(g), 1e-300) for g in gains_all):
        warnings.warn("flat-channel ensemble: lambda is undetermined, using 1.0", stacklevel=2)
        return Calibration(1.0, float("nan"), float("nan"), 0, degenerate=True)

    rows = _ensemble_bers(mcs, ensemble, np.asarray(snr_grid, dtype=float), frames, seed)
    lo, hi = ber_window
    rows = [r for r in rows if lo <= r[2] / r[3] <= hi]
    if not rows:
        raise ArgumentError("no calibration points inside the BER window; widen the SNR grid")

    log_lo, log_hi = np.log(LAMBDA_BOUNDS[0]), np.log(LAMBDA_BOUNDS[1])
    coarse = np.linspace(log_lo, log_hi, 25)
    vals = [_objective(np.exp(x), rows, reference) for x in coarse]
    i = int(np.argmin(vals))
    bracket = (coarse[max(i - 1, 0)], coarse[min(i + 1, coarse.size - 1)])
    res = minimize_scalar(
        lambda x: _objective(np.exp(x), rows, reference),
        bounds=bracket,
        method="bounded",
        options={"xatol": 1e-4},
    )
    lam, obj = (float(np.exp(res.x)), float(res.fun)) if res.fun <= vals[i] else (float(np.exp(coarse[i])), vals[i])
    return Calibration(lam, obj, _objective(1.0, rows, reference), len(rows))


@dataclass
class LambdaTable:
    """MCS data rate (Mbit/s) -> lambda in linear SINR units."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for rate, lam in self.values.items():
            if not lam > 0:
                raise ParameterError(f"lambda for {rate} must be > 0")

    def __getitem__(self, mcs) -> float:
        key = float(get_mcs(mcs).data_rate)
        for rate, lam in self.values.items():
            if abs(float(rate) - key) < 0.05:
                return lam
        raise KeyError(f"no lambda for {key:g} Mbit/s")

    def __contains__(self, mcs) -> bool:
        try:
            self[mcs]
        except KeyError:
            return False
        return True

    def set(self, mcs, lam: float):
        if not lam > 0:
            raise ParameterError("lambda must be > 0")
        self.values[float(get_mcs(mcs).data_rate)] = float(lam)

    def dumps(self) -> str:
        return "".join(f"{rate:g} {lam!r}\n" for rate, lam in sorted(self.values.items()))

    @classmethod
    def loads(cls, text: str) -> "LambdaTable":
        values = {}
        for line in text.splitlines():
            if line.strip() and not line.lstrip().startswith("#"):
                rate, lam = line.split()
                values[float(rate)] = float(lam)
        return cls(values)


def csi_from_responses(user_ids, responses, esn0_db, lams) -> SubbandCsi:
    """CSI matrix from per-user (3, 100) band responses and per-user lambdas.

    ``esn0_db`` is one value for everybody or one per user.
    """
    snrs = np.broadcast_to(np.asarray(esn0_db, dtype=float), (len(responses),))
    out = np.empty((len(responses), 3))
    for u, (resp, lam) in enumerate(zip(responses, lams)):
        for b in range(resp.shape[0]):
            out[u, b] = to_db(effective_sinr(subcarrier_sinr(resp[b], snrs[u]), lam))
    return SubbandCsi(out, tuple(user_ids))


def user_lambdas(users, lambdas) -> list[float]:
    """Per-user lambda from a LambdaTable, or one float for everybody."""
    if isinstance(lambdas, (int, float)):
        if not lambdas > 0:
            raise ParameterError("lambda must be > 0")
        return [float(lambdas)] * len(users)
    return [lambdas[u.mcs] for u in users]


def csi_matrix(users, realizations, esn0_db: float, lambdas, shadowing: bool = False) -> SubbandCsi:
    """Effective SINR (dB) of every user on every sub-band.

    ``lambdas`` is a LambdaTable or a single float applied to every MCS.
    """
    users = list(users)
    realizations = list(realizations)
    if len(users) != len(realizations):
        raise ArgumentError(f"{len(users)} users but {len(realizations)} realizations")
    responses = [band_responses(r, shadowing) for r in realizations]
    return csi_from_responses(
        [u.user_id for u in users], responses, esn0_db, user_lambdas(users, lambdas)
    )


# --- plain-text calibration cache -------------------------------------------------


def cache_key(mcs: McsConfig, seed: int, grid) -> str:
    h = hashlib.sha256(np.asarray(grid, dtype=float).tobytes()).hexdigest()[:12]
    return f"{float(mcs.data_rate):g}_s{seed}_{h}"


class CalibrationCache:
    """Stores AWGN references (``snr_db ber ...``) and lambdas (``mcs lambda``)."""

    def __init__(self, root):
        self.root = Path(root)

    def _path(self, kind: str, key: str) -> Path:
        return self.root / f"{kind}_{key}.txt"

    def reference(self, mcs, grid=DEFAULT_AWGN_GRID, seed: int = 0, **kw) -> AwgnReference:
        mcs = get_mcs(mcs)
        path = self._path("awgn", cache_key(mcs, seed, grid))
        if path.exists():
            return AwgnReference.loads(float(mcs.data_rate), path.read_text())
        ref = awgn_reference(mcs, grid, seed, **kw)
        self.root.mkdir(parents=True, exist_ok=True)
        path.write_text(ref.dumps())
        return ref

    def lam(self, mcs, ensemble_fn, snr_grid, seed: int = 0, **kw) -> float:
        mcs = get_mcs(mcs)
        path = self._path("lambda", cache_key(mcs, seed, snr_grid))
        if path.exists():
            return LambdaTable.loads(path.read_text())[mcs]
        ref = self.reference(mcs, seed=seed)
        cal = calibrate_lambda(mcs, ensemble_fn(), snr_grid, ref, seed, **kw)
        log.info("calibrated lambda %.4g for %s Mbit/s", cal.lam, mcs.label)
        table = LambdaTable({float(mcs.data_rate): cal.lam})
        self.root.mkdir(parents=True, exist_ok=True)
        path.write_text(table.dumps())
        return cal.lam
