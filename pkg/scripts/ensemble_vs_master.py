"""Compare the quantum-jump ensemble mean with the density-matrix integrator.

Prints <n> and <sigma_z> at a few times for a small qubit-cavity instance,
with the ensemble standard error.
"""

import argparse
import math

import numpy as np

from pbbsim.mcwf import DensityMatrix, master_equation_evolve, run_ensemble
from pbbsim.model import PureState, SystemParams

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--g", type=float, default=20.0)
parser.add_argument("--delta", type=float, default=10.0)
parser.add_argument("--eta", type=float, default=5.0)
parser.add_argument("--n-max", type=int, default=60)
parser.add_argument("--trajectories", type=int, default=200)
parser.add_argument("--t-final", type=float, default=50.0)
parser.add_argument("--dt", type=float, default=10.0)
parser.add_argument("--threads", type=int, default=None)
args = parser.parse_args()

p = SystemParams(g=args.g, delta=args.delta, eta=args.eta)
recs = run_ensemble(p, args.trajectories, args.t_final, args.dt, threads=args.threads, n_max=args.n_max)
me = master_equation_evolve(DensityMatrix.from_pure(PureState.ground(args.n_max)), p, args.t_final, args.dt)

print("t,observable,ensemble,stderr,master_equation")
for attr in ("n_mean", "sigma_z_mean"):
    values = np.array([getattr(r, attr) for r in recs])
    mean = values.mean(axis=0)
    se = values.std(axis=0, ddof=1) / math.sqrt(len(recs))
    for k, t in enumerate(me.t):
        print(f"{t:g},{attr},{mean[k]:.6f},{se[k]:.6f},{getattr(me, attr)[k]:.6f}")
