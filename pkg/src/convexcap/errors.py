"""Exception hierarchy shared by all modules."""


class ConvexCapError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


# -- disk ingestion -----------------------------------------------------------


class ParseError(ConvexCapError):
    pass


class GluingMismatch(ConvexCapError):
    pass


class NotADisk(ConvexCapError):
    pass


class DegenerateTriangle(ConvexCapError):
    pass


class InvalidDisk(ConvexCapError):
    """The disk is well formed but cannot be handed to the solver."""


# -- prisms ------------------------------------------------------------------


class HeightExceedsLength(ConvexCapError):
    pass


class NoSuchPrism(ConvexCapError):
    pass


# -- cap space ---------------------------------------------------------------


class InfeasibleHeights(ConvexCapError):
    """Height vector outside the space of generalized convex caps.

    ``witness`` carries the specific violated condition when one is known.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InfeasibleWitness(InfeasibleHeights):
    """The concave PL extension does not exist (a loop or quad inequality fails)."""


class GradientBoundViolated(InfeasibleHeights):
    pass


class BoundaryHeightNonzero(InfeasibleHeights):
    pass


class ForbiddenDegeneracy(InfeasibleHeights):
    """A prism of type b) or c) appeared."""


class IterationCapExceeded(ConvexCapError):
    pass


class NotFlippable(ConvexCapError):
    pass


# -- functional / solver / embedding -----------------------------------------


class DegenerateAngle(ConvexCapError):
    pass


class InternalInfeasible(ConvexCapError):
    pass


class ConvexFaceViolation(ConvexCapError):
    pass


class ClosureFailure(ConvexCapError):
    pass
