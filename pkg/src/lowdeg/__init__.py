"""Learning low-degree functions on the Boolean hypercube."""
__version__ = "0.1.0"

from .cube import (DenseFunction, SparsePoly, l2_distance, mask_from_vars, sq_distance, vars_of,
                   wht)
from .oracle import QueryOracle
from .trees import Leaf, Node

__all__ = [
    "DenseFunction", "Leaf", "Node", "QueryOracle", "SparsePoly", "__version__", "l2_distance",
    "mask_from_vars", "sq_distance", "vars_of", "wht",
]
