"""Python access to the ergkit verifier, rewards and offline synthesis."""

from ._ergkit import *  # noqa: F401,F403
from ._ergkit import __version__
