"""Signal processing on multilayer graphs: tensor spectra, sampling, convolution, pipelines."""
from .errors import InvalidGraphError, InvalidParameterError, MlgError, MlgIOError, ShapeError
from .graph import MultilayerGraph, build_laplacian, check_undirected
from .spectra import (
    CpFactorization,
    HosvdFactorization,
    SpectralBasis,
    flattened_eigen,
    hosvd,
    imgft,
    mgft,
    orthogonal_cp,
)
from .tensor import flatten, n_mode_product, unflatten, unfold

__version__ = "0.1.0"

__all__ = [
    "InvalidGraphError",
    "InvalidParameterError",
    "MlgError",
    "MlgIOError",
    "ShapeError",
    "MultilayerGraph",
    "build_laplacian",
    "check_undirected",
    "CpFactorization",
    "HosvdFactorization",
    "SpectralBasis",
    "flattened_eigen",
    "hosvd",
    "imgft",
    "mgft",
    "orthogonal_cp",
    "flatten",
    "n_mode_product",
    "unflatten",
    "unfold",
]
