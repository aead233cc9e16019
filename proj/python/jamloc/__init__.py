"""Jamming source localization toolkit.

Thin wrapper over the compiled extension. When the package is not installed
(e.g. running tests against a CMake build tree), set JAMLOC_EXT_DIR to the
directory holding the built _jamloc module.
"""

import os
import sys

_ext_dir = os.environ.get("JAMLOC_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

try:
    from _jamloc import *  # noqa: F401,F403
    from _jamloc import __version__  # noqa: F401
except ImportError:  # installed wheel layout: jamloc/_jamloc.so
    from jamloc._jamloc import *  # noqa: F401,F403
    from jamloc._jamloc import __version__  # noqa: F401
