"""Exception types shared across the package."""


class DHLError(Exception):
    """Base class for all package errors."""


class DomainError(DHLError, ValueError):
    """An argument lies outside the domain of the operation."""


class IndeterminatePoint(DHLError, ValueError):
    """The point is within the exclusion radius of a point of indeterminacy."""


class CollapsingLine(DHLError, ValueError):
    """The point lies on a line collapsed by the migdal map (u + w = 0)."""


class BottomAtInfinity(DHLError, ValueError):
    """The bottom circle t = 0 is sent to infinity by the affine chart."""


class LevelTooLarge(DHLError, ValueError):
    """Requested hierarchical level exceeds the supported bound."""


class TooManyVertices(DHLError, ValueError):
    """Brute-force enumeration requested on a graph that is too large."""


class ZeroPartition(DHLError, ArithmeticError):
    """The partition function vanishes where a logarithm is needed."""


class CountMismatch(DHLError, RuntimeError):
    """The zero finder did not recover the expected number of zeros."""

    def __init__(self, found, expected, detail=""):
        self.found = found
        self.expected = expected
        msg = f"found {found} zeros, expected {expected}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DensityNotPositive(DHLError, ValueError):
    """A positive density value was required."""


class OrbitHitsIndeterminacy(DHLError, RuntimeError):
    """A forward orbit entered the exclusion ball of a point of indeterminacy."""

    def __init__(self, step, msg=""):
        self.step = step
        super().__init__(msg or f"orbit within exclusion radius of alpha at step {step}")
