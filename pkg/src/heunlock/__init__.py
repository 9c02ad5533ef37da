"""heunlock: Bessel determinant positivity, double confluent Heun entire
solutions, and phase-lock adjacencies of the Josephson RSJ equation.

The toolkit cross-verifies three layers of the same structure:

* specfun / youngdet: modified Bessel functions I_j(x) and the certified
  positivity of the determinant family f_{k,n}(x) over two-sided Young
  diagrams, with discrete-Laplacian ODE and generating-function oracles.
* heunrec / xiprod: entire- and polynomial-solution detection for double
  confluent Heun equations through three-term recurrences and the
  analytic matrix-product function xi_l(lambda, mu).
* torusflow: rotation numbers, phase-lock intervals, monodromy, and
  adjacency verification for the torus flow of the RSJ equation.
"""

from .errors import (
    ConvergenceError,
    HeunlockError,
    InternalConsistencyError,
    PositivityContradictionError,
    RangeOverflowError,
    UndeterminedResultError,
)
from .heunrec import HeunParams, PolySolution, TaylorSolution
from .specfun import DEFAULT_PRECISION, BesselTable, Precision
from .torusflow import JosephsonParams, Monodromy2, PortraitGrid, RotationResult
from .xiprod import RootRecord, TruncatedProduct
from .youngdet import Diagram, LatticeWindow, ScanReport, SignedDet

__version__ = "0.1.0"

__all__ = [
    "BesselTable",
    "ConvergenceError",
    "DEFAULT_PRECISION",
    "Diagram",
    "HeunParams",
    "HeunlockError",
    "InternalConsistencyError",
    "JosephsonParams",
    "LatticeWindow",
    "Monodromy2",
    "PolySolution",
    "PortraitGrid",
    "PositivityContradictionError",
    "Precision",
    "RangeOverflowError",
    "RootRecord",
    "RotationResult",
    "ScanReport",
    "SignedDet",
    "TaylorSolution",
    "TruncatedProduct",
    "UndeterminedResultError",
    "__version__",
]
