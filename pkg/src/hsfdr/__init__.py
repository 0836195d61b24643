"""Multiple testing for sparse normal means with frequentist-assisted horseshoe procedures."""

from hsfdr.errors import DimensionError
from hsfdr.model import (
    ConfusionTable,
    DecisionVector,
    FdpSummary,
    GroundTruth,
    ObservationVector,
    confusion,
    fdp_and_power,
)

__all__ = [
    "ConfusionTable",
    "DecisionVector",
    "DimensionError",
    "FdpSummary",
    "GroundTruth",
    "ObservationVector",
    "confusion",
    "fdp_and_power",
]

__version__ = "0.1.0"
