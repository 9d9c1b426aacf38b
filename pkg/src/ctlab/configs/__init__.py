"""Bundled suite configurations (JSON)."""
