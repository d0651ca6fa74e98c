"""Tail asymptotics of weighted sums of heavy-tailed random variables."""

from ._htail import *  # noqa: F401,F403
from ._htail import __version__  # noqa: F401
