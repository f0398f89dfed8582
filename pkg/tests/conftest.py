from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from namelink.parser import default_lexicon

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()
