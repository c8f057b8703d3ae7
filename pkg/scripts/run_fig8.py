"""Run the fig8 preset and write results/fig8*.csv.

Extra arguments go to the CLI, e.g. ``--jobs 4`` or ``--lambda 2.0``.
"""

import sys

from mbuwb.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["preset", "fig8", *sys.argv[1:]]))
