"""Exact path transforms of Brownian motion and Monte Carlo checks of the identities in law they satisfy."""

from .paths import (
    CumulativeProfile,
    GridError,
    Path,
    RangeError,
    TimeGrid,
    apply,
    cumulative_exp,
    reverse,
    transform_talpha,
    transform_tstar,
    transform_tz,
    z_profile,
)

__version__ = "0.1.0"
