"""Kernel backend selection.

Imports the compiled extension when present, otherwise the numpy fallback.
Set ``DPHASE_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the test suite to exercise both paths).
"""

from __future__ import annotations

import os

if os.environ.get("DPHASE_PURE_PYTHON", "") not in ("", "0"):
    from dphase import _pycore as impl
else:
    try:
        from dphase import _core as impl  # type: ignore[attr-defined]
    except ImportError:
        from dphase import _pycore as impl

BACKEND = impl.BACKEND_NAME

comp_sum = impl.comp_sum
dot = impl.dot
abs_power_sum = impl.abs_power_sum
abs_power_sum_weighted = impl.abs_power_sum_weighted
scaled_abs_power_sum = impl.scaled_abs_power_sum
scaled_abs_power_sum_weighted = impl.scaled_abs_power_sum_weighted
abs_power = impl.abs_power
signed_power = impl.signed_power
power_density = impl.power_density
typical_potential = impl.typical_potential
typical_flux_factor = impl.typical_flux_factor
weighted_potential = impl.weighted_potential
weighted_flux_factor = impl.weighted_flux_factor
bcm_potential = impl.bcm_potential
bcm_flux_factor = impl.bcm_flux_factor
