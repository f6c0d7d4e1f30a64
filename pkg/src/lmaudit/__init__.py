"""Demographic bias audits for landmark-style error metrics.

The package fits confounder-controlled linear models to a positive error
metric (for example the normalized mean error of facial landmark
predictions), tests demographic factors with Type III ANOVA, and summarizes
group differences with simultaneous-confidence marginal means on the
original metric scale.
"""

from .core import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
