"""Monte-Carlo finite elements on randomly perturbed spheres and disks."""

from ._stochfem import *  # noqa: F401,F403
from ._stochfem import __doc__  # noqa: F401

__version__ = "0.1.0"
