"""
Exception hierarchy shared by every sparseconv component.
"""
from typing import Optional


class SparseConvError(Exception):
    """Base error; renders as ``[component] message``."""

    def __init__(self, component: str, message: str, details: Optional[dict] = None):
        self.component = component
        self.message = message
        self.details = details or {}
        super().__init__(f"[{component}] {message}")


class GeometryError(SparseConvError, ValueError):
    """Shapes or indices inconsistent with a LayerSpec."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__("Geometry", message, details)


class CsrFormatError(SparseConvError, ValueError):
    """A CSR structure violates its invariants."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__("CSR", message, details)


class CodecError(SparseConvError):
    """A data file (tensor, kernel, checkpoint or records CSV) cannot be decoded."""

    def __init__(self, path: str, message: str):
        super().__init__("Codec", f"{path}: {message}", {"path": path})
        self.path = path


class ModelInputError(SparseConvError, ValueError):
    """Invalid input to the performance model."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__("PerfModel", message, details)


class PresetError(SparseConvError, KeyError):
    """Unknown or malformed preset."""

    def __init__(self, name: str, message: str):
        super().__init__("PresetManager", message, {"name": name})
        self.name = name

    def __str__(self) -> str:
        return Exception.__str__(self)


class GslError(SparseConvError):
    """Misuse of the guided sparsity controller."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__("GSL", message, details)


class TrajectoryFormatError(SparseConvError):
    """Malformed trajectory CSV."""

    def __init__(self, source: str, line: int, message: str):
        super().__init__("Trajectory", f"{source}:{line}: {message}", {"line": line})
        self.line = line


class TrainingDivergedError(SparseConvError):
    """Loss became non-finite."""

    def __init__(self, iteration: int, loss: float, details: Optional[dict] = None):
        super().__init__(
            "Trainer",
            f"Non-finite loss {loss} at iteration {iteration}",
            details,
        )
        self.iteration = iteration
        self.loss = loss


class ValidationGateError(SparseConvError):
    """A timed kernel disagreed with the dense oracle."""

    def __init__(self, variant: str, layer: str, max_error: float):
        super().__init__(
            "Sweep",
            f"Variant '{variant}' failed the oracle check on '{layer}' (max error {max_error:.3g})",
            {"variant": variant, "layer": layer, "max_error": max_error},
        )


class CalibrationError(SparseConvError):
    """Calibration runs disagree beyond tolerance."""

    def __init__(self, quantity: str, samples: list, tolerance: float):
        super().__init__(
            "Calibrate",
            f"{quantity} unstable across runs {samples} (tolerance {tolerance:.0%})",
            {"samples": samples},
        )
        self.samples = samples


class FitError(SparseConvError, ValueError):
    """Alpha fit is underdetermined."""

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__("FitAlpha", message, details)
