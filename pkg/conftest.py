"""Shared fixtures for the M-scheme simulator tests"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from model import SystemParams  # noqa: E402
from presets import get_preset  # noqa: E402


def locked(params: SystemParams, delta3: float) -> SystemParams:
    """Parameters with delta3 = delta4 = ``delta3``"""
    return params.with_detuning(3, delta3).with_detuning(4, delta3)


@pytest.fixture
def fig1a_params() -> SystemParams:
    return get_preset("fig1a").params


@pytest.fixture
def far_detuned(fig1a_params) -> SystemParams:
    return locked(fig1a_params, 20.0)


@pytest.fixture
def mirror_params(fig1a_params) -> SystemParams:
    return fig1a_params.replace(detunings=(0.0, 20.0, 0.0, 0.0))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def zero_params() -> SystemParams:
    """No drive, no decay, no dephasing"""
    return SystemParams(rabi=(0, 0, 0, 0), detunings=(0, 0, 0, 0), gamma_12=0, gamma_23=0,
                        gamma_25=0, gamma_14=0, gamma_34=0, gamma_45=0, gamma_d=0)
