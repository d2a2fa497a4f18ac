#!/usr/bin/env python3
"""
Graph signal quantization toolkit - command-line entry point

    python app.py sweep --graph ring,grid --r 15:155:10 --bits 1,2,4 --out results/
    python app.py selftest
"""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
