import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def cfg():
    from gordankit import EngineConfig

    return EngineConfig()


def assert_close(a, b, tol=1e-12, msg=""):
    assert abs(a - b) <= tol, f"{a!r} vs {b!r} (tol {tol}) {msg}"
