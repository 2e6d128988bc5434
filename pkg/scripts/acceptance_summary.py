"""Run the acceptance tests and print only the per-criterion lines."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s", "tests/test_acceptance.py"],
                   cwd=ROOT, capture_output=True, text=True)
for line in r.stdout.splitlines():
    if line.startswith("criterion"):
        print(line)
