"""Run every shipped config through the CLI into ``results/``.

    python scripts/run_studies.py [command ...]
"""

import sys
import time
from pathlib import Path

from steklov_lab.cli import COMMANDS, run

ROOT = Path(__file__).resolve().parents[1]


def main(argv):
    commands = argv or list(COMMANDS)
    failed = []
    for c in commands:
        t0 = time.time()
        code = run([c, "--config", str(ROOT / "configs" / f"{c}.json"), "--out", str(ROOT / "results")])
        print(f"{c:12s} exit {code}  {time.time() - t0:6.1f}s")
        if code:
            failed.append(c)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
