#!/usr/bin/env python3
"""Re-runs every oracle and fails when its output drifts from the frozen copy."""
import pathlib
import subprocess
import sys

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent / "fixtures"

RUNS = {
    "embeddings.json": ["embedding_oracle.py"],
    "catalog.json": ["catalog_oracle.py", str(FIXTURES / "catalog_500.jsonl")],
    "arithmetic.json": ["arithmetic_oracle.py"],
}


def main():
    failed = False
    for frozen, cmd in RUNS.items():
        fresh = subprocess.run([sys.executable, str(HERE / cmd[0]), *cmd[1:]],
                               check=True, capture_output=True, text=True).stdout
        if fresh != (HERE / "frozen" / frozen).read_text(encoding="utf-8"):
            print(f"FAIL {frozen}: oracle output differs from frozen copy")
            failed = True
        else:
            print(f"ok   {frozen}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
