"""
Dirac subspaces of a para-Hermitian vector space
================================================

W = W+ + W- with the neutral metric pairing b_i and c_i.  A Dirac subspace
is maximal isotropic; it is recorded by its projection to W+ and a 2-form.
"""

from pathlib import Path

from courant import dirac as dl
from courant.structfile import parse_input

sf = parse_input(Path(__file__).parent / "data" / "dirac2.yaml")
W = dl.ParaHermitianSpace(sf.dirac.n)


def rows(vs):
    return "[" + "; ".join(" ".join(str(x) for x in v) for v in vs) + "]"


sub = {k: dl.Subspace(v, W.dim) for k, v in sf.dirac.subspaces.items()}

# invariants: k = dim(L n W-), h = dim(L n W+), r = rank of the 2-form
for name, L in sub.items():
    ok, why = dl.is_dirac(W, L)
    print(f"{name:7s}", dl.invariants(W, L) if ok else f"not Dirac ({why})")

# graph data and back
Lp, om = dl.graph_data(W, sub["rot"], "+")
print("rot: L+ =", rows(Lp.basis), " omega+ =", rows(om.rows))
print("reconstructs rot:", dl.reconstruct(W, Lp, om) == sub["rot"])
print("W+ with the standard form gives:", rows(dl.reconstruct(W, sub["Wplus"], sf.dirac.forms["std"]).basis))

# complements of W+ are Dirac subspaces offset from W- by a skew map
theta = dl.complement_offset(W, sub["Wplus"], sub["Wminus"], sub["rot"])
print("offset W- -> rot:", rows(theta.rows))

# the para-Hermitian group moves Dirac subspaces with equal invariants into each other
psi = dl.ph_transport(W, sub["b1c2"], sub["b2c1"])
print("psi =", rows(psi.rows))
print("psi b1c2 == b2c1:", sub["b1c2"].image(psi) == sub["b2c1"])
print("preserves g and F:", psi.T @ W.g @ psi == W.g and psi @ W.F == W.F @ psi)
