"""Pseudospin and mutual information of the dressed-ladder bright-state model.

Writes bright_model.csv to OUT; any ensemble summaries passed with
--overlay add their bright-period points next to the model values.
"""

import argparse

from pbbsim.cli import main

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("out", nargs="?", default="out/bright")
parser.add_argument("--overlay", action="append", default=[])
args = parser.parse_args()

argv = ["bright-model", "-o", args.out]
for path in args.overlay:
    argv += ["--overlay", path]
main(argv)
