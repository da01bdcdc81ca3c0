"""Modular data, simple-current extensions, orbifolds and boundary data for WZW theories."""

from __future__ import annotations

__version__ = "0.1.0"
