import pytest

from stable_exit.backend import HAVE_COMPILED

# Heavy statistical workloads are only feasible with the compiled kernels;
# the pure backend is validated against them bit for bit in the parity tests.
requires_compiled = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled kernels required for this sample size"
)
