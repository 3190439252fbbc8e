#!/usr/bin/env python3
"""Fail with exit code 3 after complaining on stderr."""
import sys

sys.stdin.read()
print("something went wrong", file=sys.stderr)
sys.exit(3)
