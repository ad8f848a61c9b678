import os
import sys

# Fall back to a development build tree when the package is not installed.
try:
    import rewevo  # noqa: F401
except ImportError:
    root = os.path.join(os.path.dirname(__file__), "..", "..")
    sys.path.insert(0, os.path.join(root, os.environ.get("REWEVO_BUILD_DIR", "build"), "python"))
