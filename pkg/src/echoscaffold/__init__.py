"""Scaffold segmentation and texture analysis for longitudinal ultrasound scans."""
from ._backend import BACKEND

__version__ = "0.1.0"
