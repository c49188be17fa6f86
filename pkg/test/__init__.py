"""Test package for rydberg_squeezing."""
