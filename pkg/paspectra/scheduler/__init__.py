"""Replicate scheduling."""
