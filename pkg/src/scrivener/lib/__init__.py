"""Shared infrastructure: structured logging and file helpers."""
