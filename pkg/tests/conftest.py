"""Shared fixtures and hypothesis settings for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from torusnlw.spectral import PhaseState, SpectralField

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_hermitian_block(rng: np.random.Generator, max_mode: int) -> np.ndarray:
    """Random complex block with c[-n] = conj(c[n]) built by symmetrisation."""
    K = max_mode
    side = 2 * K + 1
    raw = rng.standard_normal((side, side)) + 1j * rng.standard_normal((side, side))
    sym = 0.5 * (raw + np.conj(raw[::-1, ::-1]))
    sym[K, K] = sym[K, K].real
    return sym


def random_field(rng: np.random.Generator, max_mode: int, scale: float = 1.0) -> SpectralField:
    return SpectralField(max_mode, scale * random_hermitian_block(rng, max_mode))


def random_state(rng: np.random.Generator, max_mode: int, scale: float = 1.0) -> PhaseState:
    return PhaseState(
        u=random_field(rng, max_mode, scale),
        v=random_field(rng, max_mode, scale),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
