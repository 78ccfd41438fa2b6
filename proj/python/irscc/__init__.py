from irscc._core import *  # noqa: F401,F403
from irscc._core import __version__  # noqa: F401
