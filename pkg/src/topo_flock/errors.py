from __future__ import annotations


class TopoFlockError(Exception):
    """Base class for every error raised by topo_flock."""


class NonPositiveDensity(TopoFlockError, ValueError):
    def __init__(self, index: int, value: float) -> None:
        self.index = int(index)
        self.value = float(value)
        super().__init__(f"density must be strictly positive, cell {self.index} has {self.value!r}")


class SingularEvaluation(TopoFlockError, ValueError):
    pass


class RadiusOutOfRange(TopoFlockError, ValueError):
    def __init__(self, radius: float, lower: float, upper: float) -> None:
        self.radius = float(radius)
        self.lower = float(lower)
        self.upper = float(upper)
        super().__init__(f"drift radius {self.radius!r} outside [{self.lower!r}, {self.upper!r}]")


class PositivityLoss(TopoFlockError, ArithmeticError):
    def __init__(self, index: int, value: float, t: float) -> None:
        self.index = int(index)
        self.value = float(value)
        self.t = float(t)
        super().__init__(
            f"density lost positivity at cell {self.index} (value {self.value!r}) near t={self.t!r}"
        )


class CflViolation(TopoFlockError, ValueError):
    def __init__(self, dt: float, dt_max: float) -> None:
        self.dt = float(dt)
        self.dt_max = float(dt_max)
        super().__init__(f"time step {self.dt!r} exceeds the admissible bound {self.dt_max!r}")


class StiffPairDetected(TopoFlockError, RuntimeError):
    def __init__(self, i: int, j: int, separation: float, r_floor: float) -> None:
        self.i = int(i)
        self.j = int(j)
        self.separation = float(separation)
        self.r_floor = float(r_floor)
        super().__init__(
            f"agents {self.i} and {self.j} came within {self.separation!r} (floor {self.r_floor!r})"
        )


class EigSolverFailure(TopoFlockError, RuntimeError):
    pass


class ConfigInvalid(TopoFlockError, ValueError):
    def __init__(self, messages: list[str]) -> None:
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
