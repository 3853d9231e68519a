"""Building blocks: shrinkage, clamping, and the primal/dual objective pair.

The library solves   minimize_w  0.5*||A w - b||^2 + lam*||w||_1.
Everything else is built from two componentwise operators and the two
objectives, demonstrated here on vectors small enough to eyeball.
"""

import numpy as np

from dalsparse import (
    ProblemInstance,
    dual_objective,
    primal_objective,
    project_linf,
    soft_threshold,
)

v = np.array([2.0, 0.5, -3.0, 1.0, -1.0])
t = 1.0
print("v                 =", v)
print("soft_threshold    =", soft_threshold(v, t))
print("project_linf      =", project_linf(v, t))
print("shrink + clamp    =", soft_threshold(v, t) + project_linf(v, t),
      " (recovers v)")
print()

# A one-dimensional problem with a closed form: A=[2], b=[3], lam=1.
# Stationarity 4w - 6 + sign(w) = 0 gives w* = 1.25 and f(w*) = 1.375.
p = ProblemInstance(design=[[2.0]], observations=[3.0], lam=1.0)
print("f(w*) =", primal_objective(p, [1.25]))

# The dual maximizes -0.5*||alpha - b||^2 + 0.5*||b||^2 over the slab
# ||A^T alpha||_inf <= lam.  Its maximizer is alpha* = b - A w* = 0.5 and
# strong duality makes the values meet.
print("d(alpha*) =", dual_objective(p, [0.5]))
print()

# Weak duality in action: any feasible alpha lower-bounds any primal value.
rng = np.random.default_rng(0)
A = rng.standard_normal((5, 20)) / np.sqrt(40)
b = rng.standard_normal(5)
prob = ProblemInstance(design=A, observations=b, lam=0.1)
for _ in range(3):
    w = rng.standard_normal(20)
    alpha = rng.standard_normal(5)
    alpha *= 0.99 * prob.lam / max(np.abs(A.T @ alpha).max(), prob.lam)
    print(f"primal {primal_objective(prob, w):8.4f}  >=  "
          f"dual {dual_objective(prob, alpha):8.4f}")
