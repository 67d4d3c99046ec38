#!/usr/bin/env python3
"""Run every golden reproduction; exit non-zero on any failing check."""
import sys

from mevscope.cli import main

if __name__ == "__main__":
    sys.exit(main(["examples", *sys.argv[1:]]))
