import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fracblow", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fracblow"))


@pytest.fixture(scope="session")
def disk():
    from fracblow import BallDomain
    return BallDomain(2)
