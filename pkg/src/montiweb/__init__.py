"""Model-driven web application toolchain for class, view and activity models."""

__version__ = "0.1.0"
