import random

import pytest
from hypothesis import settings

# timing-heavy fixtures (latency floors, servers) make wall-clock deadlines
# meaningless; examples are capped instead
settings.register_profile("r2o", deadline=None, max_examples=60)
settings.load_profile("r2o")


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
