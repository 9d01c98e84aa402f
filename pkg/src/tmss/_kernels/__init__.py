"""RK4 kernel for the ion Hamiltonian: compiled core with a numpy fallback.

Set ``TMSS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _ion_rk4_py as fallback

IMPLEMENTATION = "python"
rk4_two_colour = fallback.rk4_two_colour
apply_h = fallback.apply_h

if os.environ.get("TMSS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ion_rk4 as compiled
    except ImportError:
        compiled = None
    else:
        IMPLEMENTATION = "compiled"
        rk4_two_colour = compiled.rk4_two_colour
        apply_h = compiled.apply_h
else:
    compiled = None
