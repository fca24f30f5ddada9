"""Energy-aware zero-forcing precoding for massive MIMO base stations."""

from ._core import *  # noqa: F401,F403
from ._core import (  # noqa: F401
    BsModel,
    DimensionError,
    DomainError,
    Error,
    InfeasibleError,
    PaModel,
    SingularChannelError,
    SizeError,
)

__version__ = "0.1.0"
