"""Conditional least-squares GAN for synthetic seizure EEG, plus the detector-based evaluation."""

__version__ = "0.1.0"
