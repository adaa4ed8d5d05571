"""Numerical laboratory for circle coverings, conjugacies, and matings."""

__all__ = [
    "circle_maps",
    "conjugacy",
    "errors",
    "geom",
    "markov",
    "qc_extension",
    "reflection_groups",
    "holo_dynamics",
    "raster",
    "schwarz",
    "suffridge",
    "cli",
]
