import numpy as np
import pytest

from esfi import TimeGrid, available_backends, integrate, make_initial_state
from esfi.backend import default_backend, get_kernel
from tests.conftest import REPORTED, TABLE_HEAD

needs_compiled = pytest.mark.skipif(
    "cython" not in available_backends(), reason="compiled kernel not built"
)


@needs_compiled
@pytest.mark.parametrize("overrides", [
    {},
    {"s_zero": 1e6},
    {"alpha_pos": 0.05, "alpha_neu": 0.05, "alpha_neg": 0.05},
    {"beta": 1e-3, "s_zero": 2e4},
])
def test_backends_agree(overrides):
    params = REPORTED.replace(**overrides)
    init = make_initial_state(params, *TABLE_HEAD)
    grid = TimeGrid.uniform(0, 120, 161)
    a = integrate(params, init, grid, backend_name="cython")
    b = integrate(params, init, grid, backend_name="python")
    scale = np.abs(a.states).max()
    assert np.max(np.abs(a.states - b.states)) / scale < 1e-12
    assert a.n_steps == b.n_steps


@needs_compiled
def test_env_override_forces_fallback(monkeypatch):
    monkeypatch.setenv("ESFI_BACKEND", "python")
    assert default_backend() == "python"
    monkeypatch.setenv("ESFI_BACKEND", "cython")
    assert default_backend() == "cython"
    monkeypatch.setenv("ESFI_BACKEND", "rust")
    with pytest.raises(ValueError):
        default_backend()


def test_kernel_lookup():
    assert get_kernel("python").__name__.endswith("_dp54")
    with pytest.raises(ValueError):
        get_kernel("fortran")
