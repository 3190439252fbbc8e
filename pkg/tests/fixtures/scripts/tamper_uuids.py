#!/usr/bin/env python3
"""Illegally rewrite the entity's identity."""
import json
import sys

request = json.load(sys.stdin)
entity = request["entity"]
entity["$uuids"] = ["hijacked"]
print(json.dumps(entity))
