"""
MALADY
======

Semi-supervised graph classification by auction dynamics under class-size
bounds, and margin-based active learning on top of it.

```py
import numpy as np
from malady import (ALBudget, ClassBoundsSpec, KernelSpec, build_graph,
                    generate_blobs, malady_loop)

X, y = generate_blobs(seed=0)
G = build_graph(X, KernelSpec("gaussian", k_neighbors=20))
bounds = ClassBoundsSpec("exact", sizes=np.bincount(y))
record = malady_loop(G, y, ALBudget(initial_per_class=3, total=106), bounds, seed=0)
print(record.final_accuracy)
```
"""
from ._kernels import BACKEND
from .active import (ALBudget, AcquisitionScores, RunRecord, margin, malady_loop,
                     random_loop, score_all)
from .auction import (AuctionResult, AuctionSchedule, Bounds, Partition, check_eps_cs,
                      lower_bound_auction, membership_auction, scaled_auction,
                      upper_bound_auction)
from .dynamics import (ClassBoundsSpec, ConcaveTermSpec, LabeledData, SSLResult,
                       assignment_coefficients, ssl_classify)
from .errors import (ConfigError, ConvergenceError, FormatError, InfeasibleError,
                     InvalidParameterError, MaladyError)
from .graph import KernelSpec, SparseGraph, build_graph, knn_search
from .harness import ExperimentConfig, generate_blobs, load_dataset, run_experiment

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ALBudget", "AcquisitionScores", "RunRecord", "margin", "malady_loop", "random_loop",
    "score_all",
    "AuctionResult", "AuctionSchedule", "Bounds", "Partition", "check_eps_cs",
    "lower_bound_auction", "membership_auction", "scaled_auction", "upper_bound_auction",
    "ClassBoundsSpec", "ConcaveTermSpec", "LabeledData", "SSLResult",
    "assignment_coefficients", "ssl_classify",
    "ConfigError", "ConvergenceError", "FormatError", "InfeasibleError",
    "InvalidParameterError", "MaladyError",
    "KernelSpec", "SparseGraph", "build_graph", "knn_search",
    "ExperimentConfig", "generate_blobs", "load_dataset", "run_experiment",
]
