"""Typed records and configuration models."""
