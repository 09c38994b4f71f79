#!/usr/bin/env python3
# Copyright 2026 The ctrlmut Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs a generated optimizer source against the ask/tell stdio protocol.

Usage: ctrlmut_shim.py SOURCE_FILE

The source must define optimize(objective, dim, budget, lower, upper, seed).
Each objective call becomes one ask/tell round trip with the harness.
"""

import json
import sys
import traceback


class BudgetExhausted(Exception):
    """Raised inside the candidate once the harness stops the run."""


def _send(message):
    sys.stdout.write(json.dumps(message) + "\n")
    sys.stdout.flush()


def _receive():
    line = sys.stdin.readline()
    if not line:
        raise BudgetExhausted("harness closed the stream")
    return json.loads(line)


def _make_objective(dim):
    def objective(x):
        point = [float(v) for v in x]
        if len(point) != dim:
            raise ValueError(f"objective expects {dim} coordinates, got {len(point)}")
        _send({"type": "ask", "x": point})
        reply = _receive()
        if reply.get("type") == "stop":
            raise BudgetExhausted("evaluation budget exhausted")
        if reply.get("type") != "tell":
            raise RuntimeError(f"unexpected harness message {reply.get('type')!r}")
        return float(reply["y"])

    return objective


def run_shim(source_path):
    try:
        init = json.loads(sys.stdin.readline())
        if init.get("type") != "init":
            raise ValueError("first message is not init")
        dim, budget = int(init["dim"]), int(init["budget"])
        lower, upper, seed = float(init["lower"]), float(init["upper"]), int(init["seed"])
    except (ValueError, KeyError, TypeError) as exc:
        print(f"malformed init message: {exc}", file=sys.stderr)
        return 2

    namespace = {"__name__": "candidate", "BudgetExhausted": BudgetExhausted}
    try:
        with open(source_path, encoding="utf-8") as handle:
            code = compile(handle.read(), source_path, "exec")
        exec(code, namespace)
        optimize = namespace.get("optimize")
        if not callable(optimize):
            raise NameError("source does not define optimize(...)")
        optimize(_make_objective(dim), dim, budget, lower, upper, seed)
    except BudgetExhausted:
        return 0
    except Exception as exc:  # noqa: BLE001 - any candidate failure is reported
        traceback.print_exc(file=sys.stderr)
        _send({"type": "error", "message": f"{type(exc).__name__}: {exc}"})
        return 1
    _send({"type": "done"})
    return 0


def main(argv):
    if len(argv) != 2:
        print("usage: ctrlmut_shim.py SOURCE_FILE", file=sys.stderr)
        return 2
    return run_shim(argv[1])


if __name__ == "__main__":
    sys.exit(main(sys.argv))
