"""Command line interface and configuration."""
from .config import PRESETS, RunConfig, load_config, parse_config
from .main import main

__all__ = ["PRESETS", "RunConfig", "load_config", "parse_config", "main"]
