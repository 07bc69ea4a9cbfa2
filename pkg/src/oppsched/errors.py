"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (bad schema, bad index, bad weights)."""


class MeasurabilityError(InputError):
    """A random variable is not measurable with respect to the required partition.

    Carries the index of the offending variable and a witness pair of sample
    points that share a block but take different values.
    """

    def __init__(self, k: int, witness: tuple[int, int], values: tuple[float, float]):
        self.k = k
        self.witness = witness
        self.values = values
        a, b = witness
        va, vb = values
        super().__init__(
            f"variable {k} is not measurable: points {a} and {b} share a block "
            f"but take values {va} and {vb}"
        )


class ConvergenceError(RuntimeError):
    """Iterative solver hit its iteration cap; carries the last duality gap."""

    def __init__(self, message: str, gap: float):
        self.gap = gap
        super().__init__(f"{message} (last duality gap {gap:.3e})")


class MembershipError(ValueError):
    """A target point lies outside the rate region; carries the separating certificate."""

    def __init__(self, point, certificate):
        self.point = point
        self.certificate = certificate
        super().__init__(
            f"point {point} is outside the region; separating half-space {certificate}"
        )
