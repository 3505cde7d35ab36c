"""Planar SiC/Ag antenna optics, emitter model fits and PLE analysis."""

import os
from pathlib import Path

# An installed wheel ships its data next to the package.
_packaged = Path(__file__).with_name("data")
if _packaged.is_dir() and not os.environ.get("PLANARCAV_DATA_DIR"):
    os.environ["PLANARCAV_DATA_DIR"] = str(_packaged)

from ._core import (  # noqa: E402
    PlanarcavError,
    analyze_ple,
    antenna_enhancement,
    data_dir,
    delta_pol,
    enhancement_spectrum,
    fit_g2,
    fit_odmr,
    fit_saturation,
    g2_value,
    reflectivity,
    refractive_index,
    saturation_value,
)

__all__ = [
    "PlanarcavError",
    "analyze_ple",
    "antenna_enhancement",
    "data_dir",
    "delta_pol",
    "enhancement_spectrum",
    "fit_g2",
    "fit_odmr",
    "fit_saturation",
    "g2_value",
    "reflectivity",
    "refractive_index",
    "saturation_value",
]
