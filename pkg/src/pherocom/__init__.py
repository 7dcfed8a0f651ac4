"""Decentralized virtual-pheromone swarm coordination with gossip map sharing."""

from .config import SimConfig, load_config, parse_config
from .engine import RunResult, batch, run
from .grid import Environment, load_map, parse_map
from .maps import resolve_environment

__all__ = ["Environment", "RunResult", "SimConfig", "batch", "load_config", "load_map",
           "parse_config", "parse_map", "resolve_environment", "run"]
__version__ = "0.1.0"
