"""Run the fig6 preset and write results/fig6*.csv.

Extra arguments go to the CLI, e.g. ``--jobs 4`` or ``--lambda 2.0``.
"""

import sys

from mbuwb.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["preset", "fig6", *sys.argv[1:]]))
