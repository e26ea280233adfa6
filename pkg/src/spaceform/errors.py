class GeometryError(Exception):
    """Base class for all errors raised by spaceform."""


class ModelViolation(GeometryError):
    """A point or vector is off the model surface beyond ``tol_model``."""


class AntipodalPoints(GeometryError):
    """The minimal geodesic between two sphere points is not unique."""


class OnFocalSet(GeometryError):
    """The point lies on V_W, where the projection onto W is undefined."""


class RankDeficient(GeometryError):
    """The immersion Jacobian has lost rank at the requested parameter."""


class ContinuationStalled(GeometryError):
    """The fiber-walk corrector did not converge."""


class EmptyNearestSet(GeometryError):
    """No nearest point of a target set could be located."""


class LipschitzViolation(GeometryError):
    """A field breaks its declared Lipschitz bound on sampled pairs."""


class UnknownEntry(KeyError):
    """Corpus lookup with an id that is not shipped."""


class ExcludedBasePoint(ValueError):
    """A fiber base point was requested at one of the excluded points."""


class SceneError(ValueError):
    """A scene file failed to parse or validate."""
