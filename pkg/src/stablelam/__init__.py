"""Random dissections of polygons, conditioned Galton-Watson trees,
stable excursions, laminations of the disk, and fractal-dimension
estimation of the limit objects."""

__version__ = "0.1.0"
