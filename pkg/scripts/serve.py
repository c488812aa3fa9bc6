#!/usr/bin/env python3
"""Start the analytics HTTP service. See `tslens-serve --help`."""

import sys

from tslens.service import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
