"""Shared reference scenarios for the test suite.

The "reference" link settings are the 200 m FSO / 200 m THz / 100 m mmWave
geometry used throughout: strong or moderate optical turbulence and the two
THz antenna cases (a): alpha=2, mu=3, N_r=2 and (b): N_r=3.
"""

import pytest

ACCEPTANCE_RESULTS = []


def record_criterion(number: int, title: str, passed: bool, detail: str = ""):
    """Collect one acceptance-criterion verdict for the terminal summary."""
    ACCEPTANCE_RESULTS.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        suffix = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"{status}  criterion {number}: {title}{suffix}")

from fsothz.channel_access import AccessLinkSpec
from fsothz.channel_fso import FsoLinkSpec, PointingGeometry
from fsothz.channel_thz import ThzEnvironment, ThzLinkSpec, default_rx_radius_m
from fsothz.metrics_analytic import SystemSpec
from fsothz.switching import HardPolicy, SoftPolicy

GTH_5DB = 10.0 ** 0.5


def fso_spec(cn2=1e-12, tau=1, beamwidth_m=0.40, jitter_std_m=0.05,
             aperture_radius_m=0.20, length_m=200.0, visibility_km=10.0):
    return FsoLinkSpec(
        wavelength_m=1550e-9, length_m=length_m, visibility_km=visibility_km,
        cn2=cn2, detection_tau=tau, eta=1.0,
        pointing=PointingGeometry(aperture_radius_m, beamwidth_m, jitter_std_m))


def thz_spec(mu=3.0, n_rx=2, alpha=2.0, beamwidth_m=0.50, jitter_std_m=0.06,
             aperture_radius_m=None, length_m=200.0):
    env = ThzEnvironment(
        temperature_k=298.0, pressure_pa=101325.0, relative_humidity_pct=50.0,
        frequency_hz=119e9, distance_m=length_m,
        tx_gain_dbi=55.0, rx_gain_dbi=55.0)
    if aperture_radius_m is None:
        aperture_radius_m = default_rx_radius_m(119e9, 55.0)
    return ThzLinkSpec(
        env=env, alpha=alpha, mu=mu, n_rx=n_rx, omega=1.0,
        pointing=PointingGeometry(aperture_radius_m, beamwidth_m, jitter_std_m))


def access_spec(m=2.0, n_tx=2, length_m=100.0):
    return AccessLinkSpec(
        frequency_hz=28e9, length_m=length_m, tx_gain_dbi=44.0,
        rx_gain_dbi=44.0, oxygen_db_per_km=15.1, rain_db_per_km=0.0,
        m=m, n_tx=n_tx, omega_r=1.0)


def system_spec(snr_db=30.0, policy=None, cn2=1e-12, n_rx=2, m=2.0, n_tx=2,
                tau=1, mu=3.0):
    if policy is None:
        policy = HardPolicy(GTH_5DB)
    return SystemSpec(
        fso=fso_spec(cn2=cn2, tau=tau), thz=thz_spec(mu=mu, n_rx=n_rx),
        access=access_spec(m=m, n_tx=n_tx), policy=policy,
        gamma_r_th=GTH_5DB, transmit_snr_db=snr_db)


def soft_policy(eps_db=2.0, center_db=5.0):
    return SoftPolicy(10.0 ** ((center_db + eps_db) / 10.0),
                      10.0 ** ((center_db - eps_db) / 10.0),
                      10.0 ** (center_db / 10.0))


@pytest.fixture(scope="session")
def strong_fso():
    return fso_spec(cn2=1e-12)


@pytest.fixture(scope="session")
def moderate_fso():
    return fso_spec(cn2=5e-13)


@pytest.fixture(scope="session")
def case_a_thz():
    return thz_spec(n_rx=2)


@pytest.fixture(scope="session")
def case_b_thz():
    return thz_spec(n_rx=3)


@pytest.fixture(scope="session")
def ref_access():
    return access_spec()


@pytest.fixture(scope="session")
def hard_system():
    return system_spec()


@pytest.fixture(scope="session")
def soft_system():
    return system_spec(policy=soft_policy())
