"""Parametric kernel low-rank approximation with Chebyshev interpolation and tensor trains."""

from .baselines import LowRankPair, MatrixOracle, aca, truncated_svd
from .chebyshev import ChebyshevGrid, Interval, factor_matrices
from .cross import EntryOracle, NestedIndexSets, greedy_cross, init_index_sets, update_cross
from .io import load, save
from .kernels import KernelOracle, KernelSpec, ProblemGeometry, cube
from .parametric import (
    GlobalFactorization,
    OfflineConfig,
    ParametricFactorization,
    evaluate,
    global_offline,
    global_online,
    offline,
    online,
    ttk,
)
from .tt import TtTensor, tt_full, tt_round

__version__ = "0.1.0"
