"""Wind and Pitot scale-factor estimation for a robotic airship."""

from ._airwind import *  # noqa: F401,F403
from ._airwind import __doc__  # noqa: F401

__version__ = "0.1.0"
