from .space import SpaceForm
from .totally_geodesic import (
    IsometryFixingW,
    Projection,
    TotallyGeodesic,
    focal_distance,
    form_complement,
    form_orthonormalize,
    project_W,
    rotation_fixing_W,
    s_pw_frame,
    s_pw_span,
    sample_G_W,
)

__all__ = [
    "SpaceForm",
    "TotallyGeodesic",
    "IsometryFixingW",
    "Projection",
    "project_W",
    "s_pw_frame",
    "s_pw_span",
    "focal_distance",
    "sample_G_W",
    "rotation_fixing_W",
    "form_orthonormalize",
    "form_complement",
]
