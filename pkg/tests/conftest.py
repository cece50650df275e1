import numpy as np
import pytest

from spiralres.core import MaterialModel
from spiralres.resfit import S11Model
from spiralres.synth import GroundTruth, NoiseSpec
from spiralres.tls import TlsParams


@pytest.fixture
def overcoupled_model():
    return S11Model(f0=5.0e9, q_int=1.0e5, q_e_mag=2.0e4, phi=0.05,
                    a=0.9, theta=0.3, tau=42e-9)


@pytest.fixture
def nb_material():
    return MaterialModel(tc=8.1, alpha=0.028)


def make_truth(s11=None, material=None, tls=None, noise=None, seed=0,
               **kw):
    """GroundTruth with sensible defaults for sweep-level tests."""
    return GroundTruth(
        s11=s11 or S11Model(f0=5.95e9, q_int=1.2e5, q_e_mag=2.0e4, phi=0.1),
        material=material or MaterialModel(tc=8.1, alpha=0.028),
        tls=tls or TlsParams(q_tls0=float("inf"), q_other=1.5e5),
        noise=noise or NoiseSpec(),
        seed=seed,
        **kw)


def seeded_grid(lo, hi, n):
    return list(np.linspace(lo, hi, n))
