"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line."""

import time
from fractions import Fraction

import numpy as np
import pytest

from mbuwb import allocator as al
from mbuwb import channel_model as chm
from mbuwb import link_abstraction as la
from mbuwb import mac_layer as mac
from mbuwb.harness.report import emit_csv
from mbuwb.harness.scenario import load_scenario
from mbuwb.harness.sweep import gain_db, run_balance_sweep, run_ber_sweep, snr_at_ber
from mbuwb.phy.mcs import mcs_table

from oracles import exhaustive_assignment

# reference statistics of the four channel classes: (mean excess delay, rms delay spread) in ns
CHANNEL_TARGETS = {"CM1": (5.05, 5.28), "CM2": (10.38, 8.03), "CM3": (14.08, 14.28), "CM4": (None, 25.0)}
STATS_TOL = 0.15
FIG6_GAIN, FIG6_GAIN_TOL, FIG6_FALLBACK = 2.5, 1.5, 1.0
SOFT_BAND_DB = 1.0
FIG7_DEGRADATION_DB = 1.5
RANDOM_TRIALS = 10_000


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("calibration")


def _by_label(curves):
    return {c.label: c for c in curves}


def test_c1_rate_table(verdict):
    bad = [m.label for m in mcs_table() if m.rate_from_parameters() != m.data_rate]
    ok = len(mcs_table()) == 8 and not bad
    assert verdict(1, "rate table consistent in exact arithmetic", ok, f"mismatches={bad}")


def test_c2_channel_statistics(verdict):
    t0 = time.perf_counter()
    worst, details = 0.0, []
    for cm, (mean_t, rms_t) in CHANNEL_TARGETS.items():
        st = chm.ensemble_stats(chm.generate_realization(cm, 10_000 + i) for i in range(200))
        for got, want in ((st.mean_excess_delay, mean_t), (st.rms_delay_spread, rms_t)):
            if want is not None:
                worst = max(worst, abs(got / want - 1))
        details.append(f"{cm} {st.mean_excess_delay:.2f}/{st.rms_delay_spread:.2f} ns")
    elapsed = time.perf_counter() - t0
    ok = worst <= STATS_TOL and elapsed < 60
    assert verdict(2, "channel statistics within 15%", ok,
                   f"{'; '.join(details)}; worst dev {worst:.1%}; {elapsed:.1f} s")


def test_c3_eesm_properties(verdict):
    rng = np.random.default_rng(3)
    fails = {"bounds": 0, "limits": 0, "permutation": 0, "monotone": 0, "scale": 0}
    for _ in range(RANDOM_TRIALS):
        n = int(rng.integers(1, 101))
        v = rng.exponential(rng.uniform(0.1, 50.0), n) + 0.01
        lam = float(np.exp(rng.uniform(np.log(0.1), np.log(100.0))))
        eff = la.effective_sinr(v, lam)
        tol = 1e-12 * (1 + v.mean())
        if not v.min() - tol <= eff <= v.mean() + tol:
            fails["bounds"] += 1
        if (abs(la.effective_sinr(v, 1e-7) / v.min() - 1) > 1e-3
                or abs(la.effective_sinr(v, 1e7) / v.mean() - 1) > 1e-3):
            fails["limits"] += 1
        if abs(la.effective_sinr(rng.permutation(v), lam) - eff) > 1e-12 * (1 + abs(eff)):
            fails["permutation"] += 1
        w = v.copy()
        w[rng.integers(n)] += rng.uniform(0, 10)
        if la.effective_sinr(w, lam) < eff - tol:
            fails["monotone"] += 1
        c = rng.uniform(0.1, 10)
        if abs(la.effective_sinr(c * v, c * lam) - c * eff) > 1e-9 * c * (1 + eff):
            fails["scale"] += 1
    ok = not any(fails.values())
    assert verdict(3, f"EESM properties over {RANDOM_TRIALS} vectors", ok, str(fails))


@pytest.fixture(scope="session")
def fig5(cache_dir):
    return _by_label(run_ber_sweep(load_scenario("fig5"), cache_dir=cache_dir))


def test_c4_fig5_ordering(fig5, verdict):
    hard = fig5["u1-hard@480"]
    softs = [fig5["u2-soft@400"], fig5["u3-soft@400"]]
    enough = all(p.bit_errors >= 300 or p.censored for c in fig5.values() for p in c.points)
    violations = [
        f"{h.snr_db:g} dB: {h.ber:.2e} > {min(s.points[i].ber for s in softs):.2e}"
        for i, h in enumerate(hard.points)
        if any(h.ber > s.points[i].ber for s in softs)
    ]
    ok = enough and not violations
    assert verdict(4, "fig5 hard-QoS BER <= each soft-QoS BER at every point", ok,
                   "violations: " + ("; ".join(violations) or "none"))


@pytest.fixture(scope="session")
def fig6(cache_dir):
    return _by_label(run_ber_sweep(load_scenario("fig6"), cache_dir=cache_dir))


def test_c5_fig6_gain(fig6, verdict):
    base = fig6["tfc@320"]
    hard = fig6["u1-hard@320"]
    g4 = gain_db(hard, base, 1e-4)
    if g4 is not None:
        ok_gain = abs(g4 - FIG6_GAIN) <= FIG6_GAIN_TOL
        gain_text = f"hard gain @1e-4 {g4:+.2f} dB"
    else:
        g3 = gain_db(hard, base, 1e-3)
        ok_gain = g3 is not None and g3 >= FIG6_FALLBACK
        gain_text = f"hard gain @1e-3 (fallback) {g3}"
    soft_gaps = [gain_db(fig6[lab], base, t) for lab in ("u2-soft@320", "u3-soft@320") for t in (1e-3, 1e-4)]
    ok_soft = all(g is not None and abs(g) <= SOFT_BAND_DB for g in soft_gaps)
    soft_text = ", ".join("n/a" if g is None else f"{g:+.2f}" for g in soft_gaps)
    assert verdict(5, "fig6 hard-QoS gain 2.5 +- 1.5 dB, soft within 1 dB", ok_gain and ok_soft,
                   f"{gain_text}; soft gaps {soft_text} dB")


def test_c6_fig7_sharing(cache_dir, verdict):
    s = load_scenario("fig7")
    curves, points = run_ber_sweep(s, cache_dir=cache_dir, return_points=True)
    curves = _by_label(curves)
    users = s.profiles()
    full = (mac.NUM_MAS - s.bp_len) * mac.MAS_DURATION_US * users[0].mcs.data_rate
    payload_ok = True
    ratios = set()
    for r in points:
        for u in users:
            n_shared = r.shared_superframes[u.user_id]
            expected = (r.superframes - n_shared) * full + n_shared * full / 2
            payload_ok &= r.served_bits[u.user_id] == expected
        for a in r.assignments:
            sf = mac.build_superframe(a, s.bp_len)
            dedicated = [x for x in a.user_ids if not a.is_shared(x)]
            for x in a.user_ids:
                if a.is_shared(x):
                    payload_ok &= sf.served_bits(x, 320) == Fraction(1, 2) * sf.served_bits(dedicated[0], 320)
                    ratios.add(mac.delay_ratio(sf, x, dedicated[0]))
    base = snr_at_ber(curves["tfc@320"], 1e-3)
    degr = [snr_at_ber(curves[lab], 1e-3) for lab in ("u3-soft@320", "u4-soft@320")]
    degr = [None if d is None or base is None else d - base for d in degr]
    ok_ber = all(d is not None and d <= FIG7_DEGRADATION_DB for d in degr)
    ok = payload_ok and ratios == {2} and ok_ber
    assert verdict(6, "fig7 shared payload 1/2, delay ratio 2, soft degradation <= 1.5 dB", ok,
                   f"payload exact={payload_ok}; delay ratios={sorted(map(str, ratios))}; "
                   f"soft degradation @1e-3 {degr} dB")


def test_c7_fig8_balance(cache_dir, verdict):
    s = load_scenario("fig8")
    rows = run_balance_sweep(s, s.ratios, cache_dir=cache_dir)
    gains = [r.hard_gain_db for r in rows]
    table = ", ".join(f"{r.ratio:g}:{'n/a' if g is None else f'{g:+.2f}'}" for r, g in zip(rows, gains))
    ok = False
    if all(g is not None for g in gains):
        best = int(np.argmax(gains))
        ok = 0 < best < len(gains) - 1 and gains[0] < gains[best] and gains[-1] < gains[best]
    assert verdict(7, "fig8 hard-QoS gain peaks at an interior W_MAC/W_PHY", ok, f"gain @1e-3 by ratio {table}")


def test_c8_negotiation_oracle(verdict):
    rng = np.random.default_rng(8)
    mismatches = invariant_failures = 0
    for trial in range(RANDOM_TRIALS):
        n = 1 + trial % 4
        values = rng.normal(8.0, 5.0, (n, 3))
        if trial % 5 == 0:
            values = np.round(values / 4.0) * 4.0  # force ties
        levels = al.allocation_levels(list(range(1, n + 1)), rng.dirichlet(np.ones(n)), values,
                                      float(rng.uniform(0, 4)), 1.0)
        a = al.negotiate(levels)
        mismatches += a.bands != exhaustive_assignment(levels)
        placed = sorted(a.user_ids) == list(range(1, n + 1))
        busy = sum(bool(b) for b in a.bands) == min(n, 3)
        invariant_failures += not (placed and busy)
    ok = mismatches == 0 and invariant_failures == 0
    assert verdict(8, f"negotiate equals exhaustive oracle on {RANDOM_TRIALS} matrices", ok,
                   f"mismatches={mismatches}, invariant failures={invariant_failures}")


def test_c9_distributed_agreement(verdict):
    rng = np.random.default_rng(9)
    disagreements = 0
    for trial in range(RANDOM_TRIALS):
        n = 1 + trial % 4
        classes = list(rng.choice(["hard", "soft"], n))
        q = mac.assign_weights(classes)
        profiles = [mac.UserProfile(i + 1, c, 320, w) for i, (c, w) in enumerate(zip(classes, q))]
        csi = la.SubbandCsi(rng.normal(8.0, 5.0, (n, 3)), tuple(range(1, n + 1)))
        devices = [mac.DeviceState(p, csi.values[i]) for i, p in enumerate(profiles)]
        a = mac.beacon_exchange(devices, csi, delivery_rng=rng)
        b = mac.beacon_exchange(devices[::-1], csi, delivery_rng=rng)
        if not (a.agreed() and b.agreed() and a.assignment == b.assignment):
            disagreements += 1
    assert verdict(9, f"beacon exchange agreement on {RANDOM_TRIALS} inputs", disagreements == 0,
                   f"disagreements={disagreements}")


def test_c10_determinism(tmp_path, cache_dir, verdict):
    s = load_scenario("fig6").with_(realizations=8, min_errors=20, max_bits=20_000, snr_stop=8.0)
    files = []
    for i, jobs in enumerate((1, 8, 1)):
        curves = run_ber_sweep(s, jobs=jobs, cache_dir=cache_dir)
        files.append(emit_csv(curves, tmp_path / f"run{i}.csv").read_bytes())
    ok = files[0] == files[1] == files[2]
    assert verdict(10, "reduced fig6 CSV byte-identical at parallelism 1 and 8", ok,
                   f"{len(files[0])} bytes")
