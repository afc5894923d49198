import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from eegalign import SynthConfig, synth_erp, synth_mi

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_spd(rng, n, spread=1.0):
    """SPD matrix with log-eigenvalues uniform in [-spread, spread]."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.exp(rng.uniform(-spread, spread, n))
    M = (Q * lam) @ Q.T
    return 0.5 * (M + M.T)


def random_spd_stack(rng, k, n, spread=1.0):
    return np.stack([random_spd(rng, n, spread) for _ in range(k)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_mi():
    return synth_mi(SynthConfig(n_subjects=3, n_trials_per_class=20, n_channels=6, n_samples=64, seed=3))


@pytest.fixture(scope="session")
def small_erp():
    return synth_erp(SynthConfig(n_subjects=3, n_trials_per_class=6, n_channels=4, n_samples=32,
                                 fs=64.0, noise_scale=0.5, seed=5))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
