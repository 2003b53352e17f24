"""Regenerate the shipped TLE files for the MEO and GEO layers.

The MEO shell is 20 evenly phased equatorial satellites at 8062 km; the GEO
shell holds three geosynchronous satellites parked over 143.5E, 25E and 98W.
Mean motions and epoch phases are derived from the simulator's own gravity
and sidereal-rate constants so the parked longitudes hold over the mission.

Usage: python tools/make_default_tles.py [output_dir]
"""
from __future__ import annotations

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cldsim.constants import EARTH_RADIUS_M, GMST_RATE_DEG_PER_DAY, MU_EARTH
from cldsim.orbit import Epoch, gmst_deg, tle_checksum

EPOCH_TEXT = "2022-09-01 01:00:00"
EPOCH_FIELD = "22244.04166667"  # same instant as YYDDD.DDDDDDDD

MEO_ALTITUDE_M = 8062e3
MEO_COUNT = 20
GEO_LONGITUDES_DEG = {"INMARSAT-4 F1": 143.5, "INMARSAT-4 F2": 25.0, "INMARSAT-4 F3": -98.0}


def mean_motion_rev_day(semi_major_m: float) -> float:
    n_rad_s = math.sqrt(MU_EARTH / semi_major_m**3)
    return n_rad_s * 86400.0 / (2.0 * math.pi)


def tle_lines(satnum: int, intl: str, inc_deg: float, raan_deg: float,
              ecc: float, argp_deg: float, m_deg: float, n_rev_day: float) -> tuple[str, str]:
    line1 = (
        f"1 {satnum:05d}U {intl:<8s} {EPOCH_FIELD:>14s}  .00000000"
        f"  00000-0  00000-0 0  999"
    )
    line2 = (
        f"2 {satnum:05d} {inc_deg:8.4f} {raan_deg:8.4f} {round(ecc * 1e7):07d}"
        f" {argp_deg:8.4f} {m_deg:8.4f} {n_rev_day:11.8f}    1"
    )
    assert len(line1) == 68 and len(line2) == 68, (len(line1), len(line2))
    return line1 + str(tle_checksum(line1)), line2 + str(tle_checksum(line2))


def make_meo() -> str:
    n = mean_motion_rev_day(EARTH_RADIUS_M + MEO_ALTITUDE_M)
    out = []
    for k in range(MEO_COUNT):
        name = f"O3B M{k + 1:02d}"
        l1, l2 = tle_lines(
            satnum=40001 + k, intl="13001A", inc_deg=0.0, raan_deg=0.0,
            ecc=0.0, argp_deg=0.0, m_deg=(k * 360.0 / MEO_COUNT) % 360.0,
            n_rev_day=n,
        )
        out += [name, l1, l2]
    return "\n".join(out) + "\n"


def make_geo() -> str:
    # Geosynchronous semi-major axis for the simulator's sidereal rate.
    omega = math.radians(GMST_RATE_DEG_PER_DAY) / 86400.0
    a_geo = (MU_EARTH / omega**2) ** (1.0 / 3.0)
    n = mean_motion_rev_day(a_geo)
    gmst0 = gmst_deg(Epoch.from_utc(EPOCH_TEXT))
    out = []
    for k, (name, lng) in enumerate(GEO_LONGITUDES_DEG.items()):
        l1, l2 = tle_lines(
            satnum=30001 + k, intl="05009A", inc_deg=0.0, raan_deg=0.0,
            ecc=0.0, argp_deg=0.0, m_deg=(gmst0 + lng) % 360.0, n_rev_day=n,
        )
        out += [name, l1, l2]
    return "\n".join(out) + "\n"


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "src" / "cldsim" / "data"
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "o3b.tle").write_text(make_meo())
    (out_dir / "inmarsat4.tle").write_text(make_geo())
    print(f"wrote {out_dir / 'o3b.tle'} and {out_dir / 'inmarsat4.tle'}")


if __name__ == "__main__":
    main()
