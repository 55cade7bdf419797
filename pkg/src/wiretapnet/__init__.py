"""Secure-rate bounds for networks of physically degraded wiretap channels.

Noisy edges are replaced by noiseless confidential/public bit pipes, and the
resulting networks are bounded by cut arguments and by exactly verified
linear codes.
"""

from .channelmath import (
    Distribution,
    StochasticMatrix,
    WiretapChannel,
    blahut_arimoto,
    check_simultaneously_maximizable,
    max_secrecy_difference,
    mutual_information,
)
from .netmodel import AdversarySet, Demand, EdgeId, Network, Noiseless, Noisy, load_network, parse_network

__all__ = [
    "AdversarySet",
    "Demand",
    "Distribution",
    "EdgeId",
    "Network",
    "Noiseless",
    "Noisy",
    "StochasticMatrix",
    "WiretapChannel",
    "blahut_arimoto",
    "check_simultaneously_maximizable",
    "load_network",
    "max_secrecy_difference",
    "mutual_information",
    "parse_network",
]


def data_path(name: str) -> str:
    """Path of a bundled example document, e.g. ``data_path("three_edge.json")``."""
    from importlib.resources import files

    return str(files(__package__) / "data" / name)
