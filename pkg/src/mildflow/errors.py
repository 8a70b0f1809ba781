"""Exception types shared across the package."""


class HypothesisViolation(ValueError):
    """A parameter choice violates a structural hypothesis of the model.

    ``hypothesis`` holds the violated condition in its conventional written
    form, e.g. ``"μ+β ≤ 1"``.
    """

    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        msg = f"hypothesis violated: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ScenarioError(ValueError):
    """Malformed scenario file or descriptor."""


class SolverError(RuntimeError):
    """Raised when the integrator produces a non-finite state."""

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message if node is None else f"{message} at node {node}")
