#!/usr/bin/env python3
# Line-delimited JSON task environment: one tool, "solve", marks success.
import json
import sys

solved = False
for line in sys.stdin:
    req = json.loads(line)
    op = req.get("op")
    if op == "reset":
        solved = False
        reply = {"observation": "toy desk for task " + str(req["task"]["task_id"]), "tools": "- solve {}"}
    elif op == "step":
        if req.get("name") == "solve":
            solved = True
            reply = {"observation": "solved"}
        else:
            reply = {"observation": "error: unknown tool " + str(req.get("name"))}
    elif op == "is_success":
        reply = {"success": solved}
    else:
        reply = {"error": "unknown op"}
    sys.stdout.write(json.dumps(reply) + "\n")
    sys.stdout.flush()
