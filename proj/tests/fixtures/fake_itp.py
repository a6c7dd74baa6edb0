#!/usr/bin/env python3
# Scripted stand-in for an external interpolating solver; used by the
# wire-contract tests. Modes:
#   unsat TERM   reply unsat, then TERM to the interpolant request
#   sat PAIRS    reply sat, then PAIRS to get-value
#   garbage      reply nonsense to check-sat
#   sleep N      sleep N seconds before replying
#   crash        exit(1) before replying
#   log FILE ... append the received script to FILE, then continue
import sys
import time

args = sys.argv[1:]
log_path = None
if args and args[0] == "log":
    log_path = args[1]
    args = args[2:]

mode = args[0] if args else "unsat"
payload = args[1] if len(args) > 1 else "true"

lines = []
def reply(text):
    sys.stdout.write(text + "\n")
    sys.stdout.flush()

for line in sys.stdin:
    lines.append(line)
    stripped = line.strip()
    if stripped == "(check-sat)":
        if log_path:
            with open(log_path, "a") as f:
                f.writelines(lines)
        if mode == "sleep":
            time.sleep(float(payload))
            reply("unsat")
        elif mode == "crash":
            sys.exit(1)
        elif mode == "garbage":
            reply("flibbertigibbet")
        elif mode == "sat":
            reply("sat")
        else:
            reply("unsat")
    elif stripped.startswith("(get-interpolants") or stripped.startswith("(get-interpolant"):
        if mode == "unsat":
            reply("(" + payload + ")" if stripped.startswith("(get-interpolants") else payload)
        else:
            reply("(error \"no interpolant\")")
    elif stripped.startswith("(get-value"):
        reply(payload if mode == "sat" else "(error \"no model\")")
