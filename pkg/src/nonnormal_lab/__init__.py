"""Laboratory for non-normal transient amplification and input-side
variance suppression in closed-loop systems.

Core layers:

- ``linalg``      spectral diagnostics and discrete Lyapunov solves
- ``systems``     closed-loop models and the fixed-spectrum shear family
- ``signals``     disturbance generation, suppressor, input statistics
- ``rollout``     Monte Carlo rollout engines and metrics
- ``quadrotor``   planar quadrotor benchmark and LQR stand-in controller
- ``experiments`` the three controlled interventions and their statistics
- ``cli``         the ``nonnormal-lab`` command

The hot loops run on a compiled Cython core when available and on a pure
Python mirror otherwise; see ``nonnormal_lab._backend``.
"""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
