from .cache import EigenCache, decode, encode
from .config import ConfigError, ExperimentConfig
from .experiments import Session, execute

__all__ = ["EigenCache", "ConfigError", "ExperimentConfig", "Session", "decode", "encode", "execute"]
