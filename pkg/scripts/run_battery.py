#!/usr/bin/env python3
"""Run the structural-property battery (closure laws and counterexamples)."""
import sys

from mevscope.cli import main

if __name__ == "__main__":
    sys.exit(main(["battery", *sys.argv[1:]]))
