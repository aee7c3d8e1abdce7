"""Analyzer families, one module per quality characteristic."""

from . import maintainability, performance, reliability, security

__all__ = ["maintainability", "performance", "reliability", "security"]
