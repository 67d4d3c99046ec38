#!/usr/bin/env python3
"""Reproduce the composition matrix over the bundled scenarios."""
import sys

from mevscope.cli import main

if __name__ == "__main__":
    sys.exit(main(["table2", *sys.argv[1:]]))
