import functools

import numpy as np
import pytest

from superint import catalog, dynamics

ENTRY_IDS = [e.id for e in catalog.list_entries()]


@functools.lru_cache(maxsize=None)
def instance(entry_id: str):
    return catalog.instantiate(entry_id)


@functools.lru_cache(maxsize=None)
def _points(entry_id: str, n: int, seed: int):
    return dynamics.sample_points(instance(entry_id), n, seed)


def points(entry_id: str, n: int = 100, seed: int = dynamics.DEFAULT_SEED) -> np.ndarray:
    return _points(entry_id, n, seed).copy()


def fd_gradient(fun, y: np.ndarray) -> np.ndarray:
    """Central differences with h = eps^(1/3) * scale, one row per point."""
    y = np.atleast_2d(y)
    out = np.empty_like(y)
    for j in range(6):
        h = np.finfo(float).eps ** (1 / 3) * np.maximum(1.0, np.abs(y[:, j]))
        e = np.zeros_like(y)
        e[:, j] = h
        out[:, j] = (fun(y + e) - fun(y - e)) / (2 * h)
    return out


@pytest.fixture(params=ENTRY_IDS)
def entry_id(request):
    return request.param
