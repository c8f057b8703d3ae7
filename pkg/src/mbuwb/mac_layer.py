"""Service classification, QoS weights, superframe MAS accounting and beacon IEs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import allocator
from .errors import ArgumentError, ParameterError
from .phy.mcs import McsConfig, get_mcs

log = logging.getLogger(__name__)

HARD = "hard"
SOFT = "soft"
NUM_MAS = 256
MAS_DURATION_US = 256
DEFAULT_BP_LEN = 8
# traffic tolerating less delay than this is treated as hard-QoS
HARD_DELAY_LIMIT_MS = 100.0


@dataclass(frozen=True)
class TrafficDescriptor:
    realtime: bool
    delay_tolerance_ms: float = math.inf
    loss_tolerance: float = 0.0


def classify_traffic(d: TrafficDescriptor) -> str:
    if d.realtime or d.delay_tolerance_ms < HARD_DELAY_LIMIT_MS:
        return HARD
    return SOFT


@dataclass(frozen=True)
class UserProfile:
    user_id: int
    qos_class: str
    mcs: McsConfig
    weight: float | None = None  # filled by assign_weights
    weight_override: float | None = None

    def __post_init__(self):
        if self.qos_class not in (HARD, SOFT):
            raise ArgumentError(f"qos_class must be 'hard' or 'soft', got {self.qos_class!r}")
        object.__setattr__(self, "mcs", get_mcs(self.mcs))


def default_k(n_hard: int, n_soft: int) -> float:
    """Hard/soft weight ratio when a scenario does not fix one."""
    if n_hard == 0:
        return 2.0
    return float(max(2, math.ceil(n_soft / n_hard) + 1))


def assign_weights(classes, k: float | None = None, overrides=None) -> list[float]:
    """Weights summing to one with every hard weight ``k`` times every soft weight.

    ``overrides`` (same length, ``None`` entries keep the default) replaces
    individual weights before renormalising to a unit sum.
    """
    classes = list(classes)
    if not classes:
        raise ArgumentError("need at least one user")
    n_hard = sum(c == HARD for c in classes)
    n_soft = len(classes) - n_hard
    if k is None:
        k = default_k(n_hard, n_soft)
    if not k > 1:
        raise ParameterError(f"k must be greater than one, got {k}")
    q_soft = 1.0 / (n_soft + k * n_hard)
    q = [k * q_soft if c == HARD else q_soft for c in classes]
    if overrides is not None and any(o is not None for o in overrides):
        q = [qi if o is None else float(o) for qi, o in zip(q, overrides)]
        if any(not qi > 0 for qi in q):
            raise ParameterError("weight overrides must be > 0")
        total = sum(q)
        q = [qi / total for qi in q]
    return q


def weighted_users(users, k=None) -> list[UserProfile]:
    """Return copies of ``users`` with ``weight`` set from their classes."""
    users = list(users)
    q = assign_weights([u.qos_class for u in users], k, [u.weight_override for u in users])
    return [
        UserProfile(u.user_id, u.qos_class, u.mcs, qi, u.weight_override) for u, qi in zip(users, q)
    ]


# --- superframe ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Superframe:
    """MAS owners per band: ``owners[b-1, mas]``, -1 for unowned (beacon period)."""

    owners: np.ndarray
    bp_len: int

    def mas_count(self, user_id) -> int:
        return int(np.count_nonzero(self.owners == user_id))

    def time_fraction(self, user_id) -> Fraction:
        return Fraction(self.mas_count(user_id), NUM_MAS - self.bp_len)

    def served_bits(self, user_id, mcs) -> Fraction:
        """Payload bits per superframe: owned MAS x 256 us x data rate."""
        return self.mas_count(user_id) * MAS_DURATION_US * get_mcs(mcs).data_rate

    def dumps(self) -> str:
        """``mas_index owner_id band`` rows for every owned MAS."""
        rows = []
        for b in range(self.owners.shape[0]):
            for mas in range(NUM_MAS):
                owner = int(self.owners[b, mas])
                if owner >= 0:
                    rows.append(f"{mas} {owner} {b + 1}\n")
        return "".join(rows)


def build_superframe(assignment: allocator.Assignment, bp_len: int = DEFAULT_BP_LEN) -> Superframe:
    """Lay the assignment onto the 256 MAS; sharers alternate MAS round-robin."""
    if not 0 <= bp_len < NUM_MAS:
        raise ArgumentError(f"beacon period must be 0..255 MAS, got {bp_len}")
    owners = np.full((len(assignment.bands), NUM_MAS), -1, dtype=int)
    data = np.arange(bp_len, NUM_MAS)
    for b, users in enumerate(assignment.bands):
        if users:
            owners[b, data] = np.asarray(users)[np.arange(data.size) % len(users)]
    return Superframe(owners, bp_len)


def delay_ratio(sf: Superframe, shared_user, dedicated_user) -> Fraction:
    """Time to deliver equal payloads, shared over dedicated (equal MCS)."""
    return Fraction(sf.mas_count(dedicated_user), sf.mas_count(shared_user))


# --- beacon-period information elements --------------------------------------------


@dataclass(frozen=True)
class BeaconIe:
    sender: int
    al_value: float
    sequence: tuple

    def __post_init__(self):
        allocator.AllocationLevel(self.sender, self.al_value, self.sequence)  # validates


@dataclass(frozen=True)
class DeviceState:
    profile: UserProfile
    csi_row: np.ndarray  # effective SINR in dB per band

    @property
    def user_id(self) -> int:
        return self.profile.user_id


@dataclass
class ExchangeResult:
    assignments: dict  # device user_id -> Assignment
    excluded: tuple
    ies: dict = field(default_factory=dict)

    def agreed(self) -> bool:
        values = list(self.assignments.values())
        return all(a == values[0] for a in values)

    @property
    def assignment(self) -> allocator.Assignment:
        if not self.agreed():
            raise RuntimeError("devices disagree on the allocation")
        return next(iter(self.assignments.values()))


def make_ie(device: DeviceState, w_mac, w_phy, scale=None) -> BeaconIe:
    """The IE a device broadcasts: its AL and its sub-band sequence.

    ``scale=(lo, hi)`` min-max normalises the PHY term in dB; ``None`` keeps raw dB.
    """
    row = np.asarray(device.csi_row, dtype=float)
    phy = row
    if scale is not None:
        lo, hi = scale
        phy = (row - lo) / (hi - lo) if hi > lo else np.zeros_like(row)
    al = allocator.allocation_level(device.profile.weight, phy, w_mac, w_phy)
    return BeaconIe(device.user_id, al, allocator.subband_sequence(row))


def beacon_exchange(
    devices,
    csi=None,
    w_mac: float = 1.0,
    w_phy: float = 1.0,
    mode: str = "normalized",
    lost=(),
    delivery_rng: np.random.Generator | None = None,
) -> ExchangeResult:
    """Simulate one beacon period of IE exchange and the local allocations.

    Each device broadcasts one IE; every device then sorts the IEs it
    received by sender id and runs the negotiation on them. IEs from ``lost``
    senders never arrive; those devices are excluded from this superframe.
    ``delivery_rng`` shuffles per-device delivery order. The min-max bounds of
    the normalised mode come from ``csi`` (the whole matrix) or, if absent,
    from the device rows.
    """
    devices = sorted(devices, key=lambda d: d.user_id)
    if not devices:
        raise ArgumentError("beacon_exchange needs at least one device")
    if mode == "normalized":
        mat = csi.values if csi is not None else np.array([d.csi_row for d in devices])
        scale = (float(np.min(mat)), float(np.max(mat)))
    elif mode == "raw_db":
        scale = None
    else:
        raise ArgumentError(f"unknown AL mode {mode!r}")
    ies = {d.user_id: make_ie(d, w_mac, w_phy, scale) for d in devices}
    lost = set(lost)
    excluded = tuple(sorted(u for u in ies if u in lost))
    if excluded:
        log.warning("missing IE from device(s) %s; excluded this superframe", excluded)
    assignments = {}
    for d in devices:
        received = [ie for u, ie in ies.items() if u not in lost]
        if delivery_rng is not None:
            received = [received[i] for i in delivery_rng.permutation(len(received))]
        received.sort(key=lambda ie: ie.sender)
        if not received:
            continue
        levels = [allocator.AllocationLevel(ie.sender, ie.al_value, ie.sequence) for ie in received]
        assignments[d.user_id] = allocator.negotiate(levels)
    return ExchangeResult(assignments, excluded, ies)
