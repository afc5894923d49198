"""
Geometry of covariance matrices
===============================

Sample covariance matrices live on the cone of symmetric positive-definite
matrices. This walk-through compares the affine-invariant distance with the
Euclidean one and shows why the Riemannian mean behaves better than the
arithmetic mean when matrices differ in scale.
"""
import numpy as np

from eegalign import spd

rng = np.random.default_rng(0)

# two diagonal matrices make the geometry easy to read off
A = np.diag([1.0, 4.0])
B = np.diag([4.0, 1.0])
print("distance(A, B)      =", spd.riemannian_distance(A, B))
print("closed form         =", np.sqrt(2) * np.log(4))

# congruence by any invertible W leaves the distance unchanged;
# the Frobenius distance does not share that property
W = rng.standard_normal((2, 2))
print("distance after W    =", spd.riemannian_distance(W @ A @ W.T, W @ B @ W.T))
print("Frobenius before    =", np.linalg.norm(A - B))
print("Frobenius after W   =", np.linalg.norm(W @ A @ W.T - W @ B @ W.T))

# %%
# Means of matrices at different scales
# -------------------------------------
# Scaling a matrix by 100 shifts the arithmetic mean towards it. The
# Riemannian mean of ``I`` and ``100 I`` is ``10 I``, the geometric midpoint.

I = np.eye(3)
print("arithmetic mean     =", np.diag(spd.arithmetic_mean([I, 100 * I])))
res = spd.riemannian_mean([I, 100 * I])
print("Riemannian mean     =", np.diag(res.mean), f"({res.n_iter} iterations)")

# %%
# A larger set
# ------------
# For many matrices the mean is found by fixed-point iteration. The result
# records whether it converged and the size of the final tangent residual.

Q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
stack = []
for _ in range(30):
    V, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    lam = np.exp(rng.uniform(-1.5, 1.5, 8))
    stack.append((V * lam) @ V.T)
res = spd.riemannian_mean(stack)
print(f"30 matrices: converged={res.converged} after {res.n_iter} steps, residual {res.residual:.1e}")

# the mean minimizes the summed squared distance; nudging it costs more
def dispersion(M):
    return np.sum(spd.distances_to(np.stack(stack), M) ** 2)

nudged = res.mean + 1e-2 * np.eye(8)
print(f"dispersion at mean {dispersion(res.mean):.6f}  vs nudged {dispersion(nudged):.6f}")
