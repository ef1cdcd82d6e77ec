import sys
from pathlib import Path

try:
    import dphase  # noqa: F401
except ImportError:
    # allow running the suite from a fresh checkout before installation;
    # the kernel dispatch then selects the pure-Python backend
    sys.path.insert(0, str(Path(__file__).parent / "src"))
