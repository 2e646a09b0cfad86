"""Extraction client emitting the JSON-Lines embedding files the core ingests."""

from .backends import Backend, HashBackend, ModelError, resolve_backend
from .cli import main, read_requests

__version__ = "0.1.0"
