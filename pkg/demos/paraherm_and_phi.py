"""
Brackets on TM from a para-Hermitian structure and from an endomorphism
=======================================================================

A neutral metric with a product structure F gives a bracket anchored by
the projection onto the +1 eigenbundle.  An endomorphism phi with
isotropic image does the same through its phi-torsion.
"""

from pathlib import Path

from courant.calculus import EndomorphismField, MetricOnTM, VectorField
from courant.core import SampleSpec, verify
from courant import generalized as gen
from courant.structfile import parse_input

DATA = Path(__file__).parent / "data"

sf = parse_input(DATA / "paraherm.yaml")
g, F = MetricOnTM(sf.chart, sf.tm_metric), EndomorphismField(sf.chart, sf.endomorphism)
PH = gen.ParaHermitianTM(g, F)
X, Y = (VectorField(sf.chart, sf.sections[k]) for k in ("X", "Y"))
print("[X, Y]_F =", gen.paraherm_bracket(X, Y, PH))
S = gen.paraherm_structure(PH)
print("anchor F+ =", [[str(x) for x in r] for r in S.rho.rows])
print(verify(S, ["skew_i_v", "jacobi_iii"], spec=SampleSpec(trials=3)))

# phi = projection onto d/dx: its image is null for the neutral metric
sf = parse_input(DATA / "phi.yaml")
g, phi = MetricOnTM(sf.chart, sf.tm_metric), EndomorphismField(sf.chart, sf.endomorphism)
print("phi-torsion(X, Y) =", gen.phi_torsion(phi, g)(X, Y))
print("[X, Y]_phi =", gen.phi_bracket(X, Y, phi, g))
print("phi structure passes:", verify(gen.phi_structure(phi, g), "all", spec=SampleSpec(trials=3)).passed)

# the phi-torsion identity with the Nijenhuis tensor, on a non-constant phi
phi2 = EndomorphismField(sf.chart, [["x*y", "x"], ["y^2", "1"]])
e = MetricOnTM(sf.chart, [[1, 0], [0, 1]])
print("Nijenhuis identity residual:", gen.torsion_nijenhuis_residual(phi2, e, X, Y))
