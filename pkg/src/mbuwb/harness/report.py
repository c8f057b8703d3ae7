"""CSV emission and parse-back of BER curves."""

from __future__ import annotations

import csv
from pathlib import Path

from ..phy.link import BerPoint
from .sweep import BerCurve

HEADER = ("label", "snr_db", "ber", "bit_errors", "bits_tested", "censored")


def _rows(curves):
    for c in sorted(curves, key=lambda c: c.label):
        for p in sorted(c.points, key=lambda p: p.snr_db):
            yield (c.label, f"{p.snr_db:.4f}", f"{p.ber:.6e}", str(p.bit_errors),
                   str(p.bits_tested), "1" if p.censored else "0")


def emit_csv(curves, path) -> Path:
    """Write one row per point, ordered by label then SNR."""
    curves = list(curves)
    if not curves:
        raise ValueError("no curves to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerows(_rows(curves))
    return path


def parse_csv(path) -> list[BerCurve]:
    curves: dict[str, list] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader)) != HEADER:
            raise ValueError(f"{path}: unexpected header")
        for label, snr, _ber, errors, bits, censored in reader:
            curves.setdefault(label, []).append(
                BerPoint(float(snr), int(errors), int(bits), censored == "1")
            )
    return [BerCurve(label, points) for label, points in curves.items()]
