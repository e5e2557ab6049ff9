"""clickrefine: click-driven interactive segmentation refinement at desk scale."""

__version__ = "0.1.0"
