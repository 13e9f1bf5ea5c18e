"""Seizure detector and evaluation protocol."""
