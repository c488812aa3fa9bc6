#!/usr/bin/env python3
"""Run the per-stage scalability benchmark. See `bench run --help`."""

import sys

from tslens.bench import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
