"""Fingertip indentation FEM, skin-blanching image analysis and PLS depth attribution."""

__version__ = "0.1.0"
