"""Scenario files: a flat ``key = value`` grammar.

One assignment per line, ``#`` starts a comment. ``user`` may repeat::

    user = <id> <hard|soft> <rate Mbit/s> [weight=<w>]

Everything else is a scalar key listed in ``_SCALARS``. Unknown keys are
rejected with their line number.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .. import channel_model as chm
from ..errors import ConfigurationError
from ..mac_layer import HARD, SOFT, UserProfile
from ..phy.mcs import get_mcs

CROSS_LAYER = "cross-layer"
TFC_SINGLE = "wimedia-tfc-single-user"


@dataclass(frozen=True)
class UserSpec:
    user_id: int
    qos_class: str
    rate: float
    weight: float | None = None

    def profile(self) -> UserProfile:
        return UserProfile(self.user_id, self.qos_class, get_mcs(self.rate), None, self.weight)


@dataclass(frozen=True)
class Scenario:
    users: tuple
    name: str = "scenario"
    channel: str = "CM1"
    snr_start: float = 8.0
    snr_stop: float = 20.0
    snr_step: float = 2.0
    k: float | None = None
    w_mac: float = 1.0
    w_phy: float = 1.0
    realizations: int = 100
    min_errors: int = 100
    max_bits: int = 1_000_000
    seed: int = 1
    mode: str = CROSS_LAYER
    baseline: bool = False
    baseline_rate: float | None = None
    frames_per_superframe: int = 4
    superframes_per_realization: int = 1
    bp_len: int = 8
    al_mode: str = "normalized"
    lambda_override: float | None = None
    shadowing: bool = False
    ratios: tuple = ()
    snr_axis: str = "esn0"

    def __post_init__(self):
        problems = []
        if not self.users:
            problems.append("at least one user is required")
        ids = [u.user_id for u in self.users]
        if len(set(ids)) != len(ids):
            problems.append("user ids must be unique")
        if not self.snr_step > 0:
            problems.append("snr_step must be > 0")
        if self.snr_stop < self.snr_start:
            problems.append("snr_stop must be >= snr_start")
        if self.mode not in (CROSS_LAYER, TFC_SINGLE):
            problems.append(f"mode must be {CROSS_LAYER} or {TFC_SINGLE}")
        if self.snr_axis not in ("esn0", "ebn0"):
            problems.append("snr_axis must be esn0 or ebn0")
        if self.al_mode not in ("normalized", "raw_db"):
            problems.append("al_mode must be normalized or raw_db")
        if self.channel.upper() not in chm.CM_PARAMS:
            problems.append(f"unknown channel {self.channel!r}")
        if self.k is not None and not self.k > 1:
            problems.append("k must be > 1")
        if self.w_mac < 0 or self.w_phy < 0 or self.w_mac == self.w_phy == 0:
            problems.append("w_mac, w_phy must be >= 0 and not both zero")
        for name in ("realizations", "min_errors", "max_bits", "frames_per_superframe",
                     "superframes_per_realization"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if not 0 <= self.bp_len < 256:
            problems.append("bp_len must be in 0..255")
        if self.lambda_override is not None and not self.lambda_override > 0:
            problems.append("lambda must be > 0")
        for u in self.users:
            if u.qos_class not in (HARD, SOFT):
                problems.append(f"user {u.user_id}: class must be hard or soft")
            try:
                get_mcs(u.rate)
            except ConfigurationError as exc:
                problems.append(f"user {u.user_id}: {exc}")
        if problems:
            raise ConfigurationError("; ".join(problems))

    @property
    def snr_grid(self) -> np.ndarray:
        n = int(np.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return np.round(self.snr_start + self.snr_step * np.arange(n), 10)

    def profiles(self) -> list[UserProfile]:
        return [u.profile() for u in self.users]

    @property
    def baseline_mcs(self):
        return get_mcs(self.baseline_rate if self.baseline_rate is not None else self.users[0].rate)

    def dumps(self) -> str:
        """Canonical text form; ``load_scenario`` reads it back to an equal Scenario."""
        lines = []
        for u in self.users:
            w = f" weight={u.weight!r}" if u.weight is not None else ""
            lines.append(f"user = {u.user_id} {u.qos_class} {u.rate:g}{w}")
        for f in fields(self):
            if f.name == "users":
                continue
            value = getattr(self, f.name)
            if value is None or (f.name == "ratios" and not value):
                continue
            key = "lambda" if f.name == "lambda_override" else f.name
            if isinstance(value, bool):
                text = "yes" if value else "no"
            elif isinstance(value, tuple):
                text = ",".join(f"{v:g}" for v in value)
            else:
                text = f"{value:g}" if isinstance(value, float) else str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("yes", "true", "1", "on"):
        return True
    if t in ("no", "false", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text: str):
    return None if text.lower() in ("auto", "none") else float(text)


_SCALARS = {
    "name": str,
    "channel": str,
    "snr_start": float,
    "snr_stop": float,
    "snr_step": float,
    "k": _opt_float,
    "w_mac": float,
    "w_phy": float,
    "realizations": int,
    "min_errors": int,
    "max_bits": lambda t: int(float(t)),
    "seed": int,
    "mode": str,
    "baseline": _bool,
    "baseline_rate": _opt_float,
    "frames_per_superframe": int,
    "superframes_per_realization": int,
    "bp_len": int,
    "al_mode": str,
    "lambda": _opt_float,
    "shadowing": _bool,
    "snr_axis": str,
    "ratios": lambda t: tuple(float(x) for x in t.split(",") if x.strip()),
}


def _parse_user(text: str) -> UserSpec:
    parts = text.split()
    if len(parts) not in (3, 4):
        raise ValueError("expected '<id> <hard|soft> <rate> [weight=<w>]'")
    weight = None
    if len(parts) == 4:
        key, _, value = parts[3].partition("=")
        if key != "weight" or not value:
            raise ValueError(f"unexpected user field {parts[3]!r}")
        weight = float(value)
    return UserSpec(int(parts[0]), parts[1].lower(), float(parts[2]), weight)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    users = []
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        try:
            if key == "user":
                users.append(_parse_user(value))
            elif key in _SCALARS:
                if key in values:
                    raise ValueError(f"duplicate key {key!r}")
                values[key] = _SCALARS[key](value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ConfigurationError(f"{source}:{lineno}: {exc}") from None
    if "lambda" in values:
        values["lambda_override"] = values.pop("lambda")
    if "channel" in values:
        values["channel"] = values["channel"].upper()
    return Scenario(users=tuple(users), **values)


def load_scenario(path_or_preset) -> Scenario:
    """Load a scenario file, or a preset by name (``fig5`` ... ``fig8``)."""
    from .presets import PRESETS

    key = str(path_or_preset)
    if key in PRESETS:
        return parse_scenario(PRESETS[key], source=key)
    path = Path(key)
    return parse_scenario(path.read_text(), source=str(path))
