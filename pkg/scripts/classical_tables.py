"""Steady-state photon numbers and bistability edges of the classical theories.

Writes classical_roots.csv (a drive sweep at each detuning) and
boundary.csv (window edges for a few qubit decay rates) to OUT.
"""

import argparse
import json

import numpy as np

from pbbsim.cli import main

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("out", nargs="?", default="out/classical")
parser.add_argument("--g", type=float, default=100.0)
args = parser.parse_args()

etas = np.round(np.linspace(0.5, 60.0, 120), 6).tolist()
deltas = np.round(np.concatenate(([0.01, 0.1, 0.5], np.linspace(1, 60, 60))), 6).tolist()
common = ["-o", args.out, "--set", f"params.g={args.g}"]
main(["classical-roots", *common, "--set", f"sweep.eta={json.dumps(etas)}",
      "--set", "sweep.delta=[2, 10, 25, 50]"])
main(["boundary", *common, "--set", f"sweep.delta={json.dumps(deltas)}",
      "--set", "sweep.gamma=[0, 0.01, 0.1, 1]"])
