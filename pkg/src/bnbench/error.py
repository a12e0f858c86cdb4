from typing import Optional, Tuple


class Error(Exception):
    def __init__(self, message: str) -> None:
        super().__init__()
        self.message = message

    def __str__(self) -> str:
        return f"error: {self.message}"


class UsageError(Error):
    def __init__(self, message: str) -> None:
        super().__init__(message)


class AbortError(Error):
    def __init__(self, message: str = "") -> None:
        if message:
            super().__init__(f"Aborting: {message}")
        else:
            super().__init__("Aborting")


class DimensionError(Error):
    def __init__(
        self,
        what: str,
        *,
        expected: Optional[Tuple[int, ...]] = None,
        actual: Optional[Tuple[int, ...]] = None,
    ) -> None:
        if expected is not None and actual is not None:
            message = "{}: dimension mismatch (got {}, expected {})".format(
                what, actual, expected
            )
        else:
            message = f"{what}: bad dimensions"
        super().__init__(message)
        self.what = what
        self.expected = expected
        self.actual = actual


class GraphError(Error):
    def __init__(self, message: str) -> None:
        super().__init__(f"invalid graph: {message}")


class InfeasibleDensityError(Error):
    def __init__(self, nodes: int, density: float, arcs: int) -> None:
        super().__init__(
            "density {} gives {} arcs on {} nodes; at least {} are needed "
            "for a weakly connected DAG".format(
                density, arcs, nodes, nodes - 1
            )
        )
        self.nodes = nodes
        self.density = density
        self.arcs = arcs


class ConfigurationError(Error):
    def __init__(self, message: str) -> None:
        super().__init__(f"bad configuration: {message}")


class InsufficientDataError(Error):
    def __init__(self, message: str) -> None:
        super().__init__(f"insufficient data: {message}")


class RejectedMoveError(Error):
    def __init__(self, move: object, reason: str) -> None:
        super().__init__(f"rejected move {move}: {reason}")
        self.move = move
        self.reason = reason


class SelectorError(Error):
    def __init__(self, selector: str) -> None:
        super().__init__(f"selector {selector} matches no results")
        self.selector = selector


class MissingFileError(Error):
    def __init__(self, name: str) -> None:
        super().__init__(f"missing file {name}")
        self.name = name


class FormatError(Error):
    def __init__(self, name: str, detail: str) -> None:
        super().__init__(f"malformed {name}: {detail}")
        self.name = name
        self.detail = detail


class SinkError(Error):
    def __init__(self, name: str, exception: Exception) -> None:
        super().__init__(
            "cannot write results to {}; exception details {!r}".format(
                name, exception
            )
        )
        self.name = name
        self.exception = exception
