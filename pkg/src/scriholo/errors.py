"""Exception hierarchy shared by all modules."""


class ScriHoloError(ValueError):
    """Base class for domain errors raised by this package."""


class DegenerateOrigin(ScriHoloError):
    """Angles are undefined at the spatial origin r = 0."""


class NotInStrip(ScriHoloError):
    """A point of null infinity does not lie strictly above the cut."""


class BadSize(ScriHoloError):
    """A grid was requested with too few nodes."""


class NonMonotoneMap(ScriHoloError):
    """A reparametrization of the u axis is not strictly increasing."""


class SupportOverflow(ScriHoloError):
    """The source support does not fit inside the quadrature box."""


class NonGaussianTerm(ScriHoloError):
    """An analytic Fourier transform was requested for a non-Gaussian term."""


class GaugeRegion(ScriHoloError):
    """The advanced time is too small for the near-scri gauge to apply."""


class GridMismatch(ScriHoloError):
    """Two fields or profiles live on different grids."""


class CutOutsideWindow(ScriHoloError):
    """The cut lies below the start of the u window at some node."""


class SupportViolation(ScriHoloError):
    """A field is materially nonzero below the cut."""


class NegativeDeformation(ScriHoloError):
    """A deformation direction takes negative values."""


class ConfigError(ScriHoloError):
    """Invalid experiment configuration."""
