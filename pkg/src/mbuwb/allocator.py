"""Allocation levels, sub-band preference sequences and the negotiation rule."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ArgumentError, ParameterError

NUM_BANDS = 3


@dataclass(frozen=True)
class AllocationLevel:
    user_id: int
    al_value: float
    sequence: tuple  # bands, most preferred first

    def __post_init__(self):
        if not np.isfinite(self.al_value):
            raise ArgumentError(f"user {self.user_id}: AL must be finite")
        if sorted(self.sequence) != list(range(1, len(self.sequence) + 1)):
            raise ArgumentError(f"user {self.user_id}: {self.sequence} is not a band permutation")


@dataclass(frozen=True)
class Assignment:
    """``bands[b-1]`` lists the users on band b in negotiation order."""

    bands: tuple

    def band_of(self, user_id) -> int:
        for b, users in enumerate(self.bands, start=1):
            if user_id in users:
                return b
        raise KeyError(user_id)

    def fraction(self, user_id) -> Fraction:
        return Fraction(1, len(self.bands[self.band_of(user_id) - 1]))

    @property
    def user_ids(self) -> list:
        return [u for users in self.bands for u in users]

    def is_shared(self, user_id) -> bool:
        return len(self.bands[self.band_of(user_id) - 1]) > 1

    def dumps(self) -> str:
        """One ``band: user@fraction,...`` line per band."""
        lines = []
        for b, users in enumerate(self.bands, start=1):
            parts = ",".join(f"{u}@{Fraction(1, len(users))}" for u in users)
            lines.append(f"{b}: {parts}\n")
        return "".join(lines)

    @classmethod
    def loads(cls, text: str) -> "Assignment":
        bands = []
        for line in text.splitlines():
            if not line.strip():
                continue
            _, rest = line.split(":", 1)
            rest = rest.strip()
            bands.append(tuple(int(p.split("@")[0]) for p in rest.split(",")) if rest else ())
        return cls(tuple(bands))


def subband_sequence(csi_row) -> tuple:
    """Bands ordered by effective SINR, best first; ties go to the lower band."""
    row = np.asarray(csi_row, dtype=float)
    if row.ndim != 1 or not np.all(np.isfinite(row)):
        raise ArgumentError("CSI row must be a finite 1-D vector")
    return tuple(int(i) + 1 for i in np.argsort(-row, kind="stable"))


def normalize_csi(values) -> np.ndarray:
    """Min-max scale a whole CSI matrix (dB) to [0, 1]; a constant matrix maps to 0."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi - lo <= 0:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def _check_weights(w_mac, w_phy):
    if w_mac < 0 or w_phy < 0:
        raise ParameterError("layer weights must be >= 0")
    if w_mac == 0 and w_phy == 0:
        raise ParameterError("W_MAC and W_PHY cannot both be zero")


def allocation_level(q: float, csi_row, w_mac: float, w_phy: float) -> float:
    """``w_mac * q + w_phy * max(csi_row)``; the row is already in AL units."""
    _check_weights(w_mac, w_phy)
    return float(w_mac * q + w_phy * np.max(csi_row))


def allocation_levels(user_ids, weights, csi_values, w_mac, w_phy, mode="normalized"):
    """AllocationLevel for every CSI row.

    ``mode="normalized"`` rescales the whole matrix to [0, 1] first so that the
    PHY term is commensurate with the weights; ``"raw_db"`` uses dB directly.
    Preference sequences always come from the unscaled rows.
    """
    csi_values = np.asarray(csi_values, dtype=float)
    if mode == "normalized":
        scaled = normalize_csi(csi_values)
    elif mode == "raw_db":
        scaled = csi_values
    else:
        raise ArgumentError(f"unknown AL mode {mode!r}")
    return [
        AllocationLevel(uid, allocation_level(q, srow, w_mac, w_phy), subband_sequence(row))
        for uid, q, row, srow in zip(user_ids, weights, csi_values, scaled)
    ]


def rank(levels) -> list:
    """Highest AL first; equal ALs go to the lower user id."""
    return sorted(levels, key=lambda lv: (-lv.al_value, lv.user_id))


def negotiate(levels, num_bands: int = NUM_BANDS) -> Assignment:
    """Assign bands by descending AL.

    The first ``num_bands`` users each take their most preferred band not yet
    taken. Every further user joins the band whose occupants have the lowest
    summed AL (lower band on ties) and time-shares it equally.
    """
    levels = list(levels)
    if not levels:
        raise ArgumentError("negotiate needs at least one user")
    ordered = rank(levels)
    bands: list[list] = [[] for _ in range(num_bands)]
    load = [0.0] * num_bands
    for i, lv in enumerate(ordered):
        if i < num_bands:
            b = next(b for b in lv.sequence if not bands[b - 1])
        else:
            b = min(range(1, num_bands + 1), key=lambda j: (load[j - 1], j))
        bands[b - 1].append(lv.user_id)
        load[b - 1] += lv.al_value
    return Assignment(tuple(tuple(u) for u in bands))
