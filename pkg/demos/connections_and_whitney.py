"""
Brackets from metric connections
================================

A metric connection on a pseudo-Euclidean bundle with an anchor gives a
skew bracket.  Adding a flat or curved bundle to TM + T*M shows how
curvature enters the Jacobi identity.
"""

from pathlib import Path

from courant import connections as conn
from courant.core import SampleSpec, format_value, obstructions, verify, ESection
from courant.generalized import standard_structure
from courant.structfile import parse_input

DATA = Path(__file__).parent / "data"

# rank-2 bundle over the line, neutral metric, anchor onto the first frame vector
sf = parse_input(DATA / "connection.yaml")
B = conn.PseudoEuclideanBundle(sf.chart, sf.metric)
nabla = conn.default_metric_connection(B)
S0 = conn.bracket0(nabla, B, sf.anchor)
a, b, c = (ESection(sf.chart, sf.sections[k]) for k in "abc")
print("[a, b]_0 =", format_value(S0.bracket(a, b), S0.labels))
print("rho-torsion(a, b) =", conn.rho_torsion(nabla, sf.anchor, a, b))
L, J, C = obstructions(S0, a, b, c)
print("J =", format_value(J, S0.labels), " C =", format_value(C, S0.labels))
C0, C1 = conn.obstruction0(nabla, B, sf.anchor, None, a, b, c)
print("C0 =", format_value(C0, S0.labels), " C0 + beta terms =", format_value(C1, S0.labels))

# TM + T*M plus a rank-2 bundle with a rotating connection
sf = parse_input(DATA / "whitney.yaml")
S = standard_structure(sf.chart)
Cb = conn.PseudoEuclideanBundle(sf.chart, sf.c_metric)
curved = conn.MetricConnection(Cb, sf.c_connection)
for (i, j), R in sorted(conn.curvature(curved).items()):
    if i < j:
        print(f"R[{i},{j}] =", R)
W = conn.whitney_sum(S, Cb, curved)
rep = verify(W, "all", spec=SampleSpec(trials=2, degree=1))
print("failing:", rep.failing())

# on (d/dx, d/dy, c) the jacobiator is minus the curvature acting on c
f = W.frame_sections
_, J, _ = obstructions(W, f[0], f[1], f[4])
print("J(d/dx, d/dy, c1) =", format_value(J, W.labels))

# the flat connection on the same bundle gives a Courant algebroid
flat = conn.whitney_sum(S, Cb, conn.default_metric_connection(Cb))
print("flat sum passes:", verify(flat, "all", spec=SampleSpec(trials=2, degree=1)).passed)
