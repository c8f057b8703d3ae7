"""Run the fig5 preset and write results/fig5*.csv.

Extra arguments go to the CLI, e.g. ``--jobs 4`` or ``--lambda 2.0``.
"""

import sys

from mbuwb.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["preset", "fig5", *sys.argv[1:]]))
