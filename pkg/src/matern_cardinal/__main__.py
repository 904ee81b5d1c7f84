"""Entry point for running matern_cardinal as a module."""

import sys

from .main import main

if __name__ == "__main__":
    sys.exit(main())
