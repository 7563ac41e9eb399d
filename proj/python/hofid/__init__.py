from ._hofid import *  # noqa: F401,F403
from ._hofid import __doc__  # noqa: F401
