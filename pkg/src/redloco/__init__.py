"""Planar locomotion with redundant state estimators and vision-fault switching."""

__version__ = "0.1.0"
