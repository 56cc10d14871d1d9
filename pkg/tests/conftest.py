import functools

import pytest

from implosion.params_phase import FluidParams
from implosion.profile_solver import build_profile

REFERENCE = ((5.0 / 3.0, 1.15), (1.4, 1.18), (3.0, 1.3))


@functools.lru_cache(maxsize=None)
def reference_profile(gamma, r, nu=0):
    return build_profile(FluidParams.admissible(gamma, r, nu))


@pytest.fixture(params=REFERENCE, ids=lambda p: f"g{p[0]:.3g}-r{p[1]}")
def ref_profile(request):
    return reference_profile(*request.param)
