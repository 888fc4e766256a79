"""Fault detection and root-cause ranking with per-feature RBMs."""
