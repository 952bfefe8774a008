import numpy as np
import pytest

from malady import _kernels
from malady.graph import KernelSpec, build_graph
from malady.harness import SyntheticBlobsSpec, generate_blobs


@pytest.fixture(scope="session")
def small_blobs():
    """Six clusters of 30 points: fast enough for whole active-learning runs."""
    X, labels = generate_blobs(SyntheticBlobsSpec(points_per_cluster=30), seed=0)
    return X, labels, build_graph(X, KernelSpec("gaussian", 10))


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    return _kernels.get_backend(request.param)


def pytest_report_header(config):
    return f"malady kernels: {_kernels.BACKEND} (available: {_kernels.available_backends()})"
