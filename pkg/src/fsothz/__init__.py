"""Performance-evaluation toolkit for a hybrid FSO/THz backhaul link with
hard or soft switching feeding an mmWave access link.

Closed-form outage/diversity/capacity/ABER expressions are cross-validated
against a Monte Carlo channel simulator; the ``fsothz`` CLI reproduces the
reference figure sweeps as CSV.
"""

from .channel_access import AccessLinkSpec
from .channel_fso import FsoLinkSpec, PointingGeometry
from .channel_thz import ThzEnvironment, ThzLinkSpec
from .config import ScenarioConfig, load_config, parse_config
from .errors import (ConfigError, DomainError, MeijerGUnsupportedError,
                     NumericalIntegrityError)
from .metrics_analytic import Modulation, SystemSpec
from .monte_carlo import EstimateResult, RngStream
from .switching import HardPolicy, SoftPolicy, SwitchState

__version__ = "0.1.0"

__all__ = [
    "AccessLinkSpec",
    "ConfigError",
    "DomainError",
    "EstimateResult",
    "FsoLinkSpec",
    "HardPolicy",
    "MeijerGUnsupportedError",
    "Modulation",
    "NumericalIntegrityError",
    "PointingGeometry",
    "RngStream",
    "ScenarioConfig",
    "SoftPolicy",
    "SwitchState",
    "SystemSpec",
    "ThzEnvironment",
    "ThzLinkSpec",
    "load_config",
    "parse_config",
    "__version__",
]
