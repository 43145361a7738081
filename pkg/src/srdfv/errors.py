"""Exception taxonomy shared across the solver modules."""


class SrdfvError(Exception):
    """Base class for all solver-domain errors."""


class GeometryError(SrdfvError):
    pass


class MultipleCrossings(GeometryError):
    """The embedded boundary crosses a cell's edges more than twice (or an
    edge more than once). The single-chord approximation cannot represent
    this cell; refine the mesh."""


class DegenerateCut(GeometryError):
    """A cut produced a flow polygon with volume below 1e-14 of the cell
    area. Mesh generation reclassifies such cells as solid."""


class IllConditioned(SrdfvError):
    """A least-squares gradient system remained ill conditioned
    (cond > 1e8) after stencil enlargement."""


class NeighborhoodTooSmall(SrdfvError):
    """Even the 5x5 centered merging neighborhood failed to reach the
    volume threshold; signals pathological geometry."""


class StencilExhausted(SrdfvError):
    """A neighborhood reconstruction stencil has no usable off-center
    member even at the enlargement cap."""


class NonPhysicalState(SrdfvError):
    """Density or pressure became non-positive after stabilization."""

    def __init__(self, msg, step=None, stage=None, cell=None):
        super().__init__(msg)
        self.step = step
        self.stage = stage
        self.cell = cell


class UnknownBC(SrdfvError):
    """Unrecognized boundary-condition name for a domain edge."""


class OriginSingular(SrdfvError):
    """Vortex exact solution evaluated too close to the polar origin."""


class ConfigError(SrdfvError):
    """Base class for configuration errors (CLI exit code 2)."""


class ParseError(ConfigError):
    """Malformed config line."""

    def __init__(self, msg, line=None):
        super().__init__(msg)
        self.line = line


class ValidationError(ConfigError):
    """Unknown key, missing key, or out-of-range value."""

    def __init__(self, msg, key=None):
        super().__init__(msg)
        self.key = key


class AuditError(SrdfvError):
    """Conservation audit failed (CLI exit code 4)."""
