"""
Error hierarchy for graph construction, spectral computations and quantization
"""
from pathlib import Path
from typing import Optional, Union


class GraphQuantizationError(Exception):
    """Base class for all errors raised by this package"""


class InvalidParameterError(GraphQuantizationError, ValueError):
    """An argument violates a documented precondition"""


class ConfigurationError(InvalidParameterError):
    """Experiment configuration file or flag is invalid"""


class UnsupportedConfigurationError(InvalidParameterError):
    """A method was requested in a configuration it does not support"""


class ProblemSizeError(InvalidParameterError):
    """Input is larger than an exhaustive computation allows"""


class GraphParseError(InvalidParameterError):
    """Malformed graph or point-cloud input file"""

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None,
                 line_number: Optional[int] = None):
        self.path = str(path) if path is not None else None
        self.line_number = line_number
        location = ""
        if self.path is not None:
            location += f"{self.path}"
        if line_number is not None:
            location += f" line {line_number}" if location else f"line {line_number}"
        super().__init__(f"{location}: {message}" if location else message)


class IsolatedVertexError(InvalidParameterError):
    """Graph has a vertex of degree zero"""

    def __init__(self, vertex: int):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} is isolated (degree 0); normalized Laplacian undefined")


class SpectralError(GraphQuantizationError):
    """Eigendecomposition failed or produced an inaccurate basis"""


class PreprocessingError(GraphQuantizationError):
    """Kernel walk could not make progress or broke its output contract"""
