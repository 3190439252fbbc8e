#!/usr/bin/env python3
"""Collect a service's HTTP endpoints from an endpoints.txt listing.

One endpoint path per line; blank lines ignored. Adds them to the
entity's ``endpoints`` array.
"""
import json
import sys
from pathlib import Path

request = json.load(sys.stdin)
entity = request["entity"]
base = Path(request["repo_root"]) / entity.get("$path", "")
listing = base / "endpoints.txt"
if listing.is_file():
    endpoints = [line.strip() for line in listing.read_text(encoding="utf-8").splitlines() if line.strip()]
    if endpoints:
        entity["endpoints"] = entity.get("endpoints", []) + endpoints
print(json.dumps(entity))
