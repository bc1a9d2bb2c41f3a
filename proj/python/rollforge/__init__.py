"""Ball-arena environment, grounded sequence model and offline RL."""

from rollforge._core import *  # noqa: F401,F403
from rollforge._core import __version__  # noqa: F401
