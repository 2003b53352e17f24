"""Physical constants shared across the simulator.

The Earth is modeled as a sphere; slant ranges and elevation angles at the
precision relevant to scheme-ordering results are insensitive to oblateness.
"""

# Spherical Earth radius (m).
EARTH_RADIUS_M = 6371.0e3

# Gravitational parameter of Earth, mu = GM (m^3/s^2).
MU_EARTH = 3.986004418e14

# Speed of light in vacuum (m/s).
SPEED_OF_LIGHT = 299792458.0

# Linear GMST approximation: GMST(t) = GMST0 + RATE * days_since_J2000 (deg).
GMST_AT_J2000_DEG = 280.46061837
GMST_RATE_DEG_PER_DAY = 360.98564736629

SECONDS_PER_DAY = 86400.0
