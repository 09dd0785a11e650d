"""
Grid scans and CSV output
=========================

The scan functions return ``(header, rows)`` and write CSV with 17
significant digits. The ``effent`` command wraps the same calls.
The grids below are small so the script finishes quickly.
"""

import sys

from effent.config import load_config
from effent.experiments import ScanSpec, run_fig1, run_fig2, run_fig3, write_csv

# Coherent states with all occupations known, at a = 0.
header, rows = run_fig1(0.0, ScanSpec(0, 1, 5), restarts=4)
write_csv(header, rows, sys.stdout)

# x and z only; empty cells have no physical completion.
header, rows = run_fig2(ScanSpec(0, 1, 3), ScanSpec(0, 2, 5), restarts=4)
write_csv(header, rows, sys.stdout)

# z-only readout of a dephasing |+> state, on a coarse time grid.
cfg = load_config("[time]\nstop = 2.0\nstep = 0.5\n[run]\ntemperatures = [0.0, 100.0]\n")
header, rows = run_fig3(cfg)
write_csv(header, rows, sys.stdout)

# Same thing from the shell:
#   effent fig3 --temperatures 0,100 --out fig3.csv --gnuplot
#   effent fig2 --x-grid 0:1:21 --z-grid 0:2:21 --threads 4 --out fig2.csv
#   echo "z_only,,,1.5,," | effent effent --record -
