"""Test package for meta-transition."""
