"""
The standard bracket on TM + T*M and its twists
===============================================

Brackets, the Dorfman product, the identity suites, and what goes wrong
when the twisting 3-form is not closed.
"""

from pathlib import Path

from courant.core import ESection, SampleSpec, format_value, obstructions, verify
from courant.generalized import TwistForm, standard_structure
from courant.expr import parse_form
from courant.structfile import parse_input

DATA = Path(__file__).parent / "data"

# the plane with a few named sections of TM + T*M
sf = parse_input(DATA / "standard2.yaml")
S = standard_structure(sf.chart)
X, ydx, mixed = (ESection(sf.chart, sf.sections[k]) for k in ("X", "ydx", "mixed"))
print("[d/dx, y dx]      =", format_value(S.bracket(X, ydx), S.labels))
print("d/dx * y dx       =", format_value(S.product(X, ydx), S.labels))
print("[mixed, y dx]     =", format_value(S.bracket(mixed, ydx), S.labels))

# the product is the bracket plus the partial of the pairing
lhs = S.product(mixed, ydx)
rhs = S.bracket(mixed, ydx) + S.partial(S.pairing(mixed, ydx))
print("product - bracket - d g =", format_value(lhs - rhs, S.labels))

# every suite passes on random polynomial sections
print(verify(S, "all", spec=SampleSpec(seed=1, trials=5)))

# a closed twist on R^3 keeps the Jacobi identity ...
twist3 = parse_input(DATA / "twist3.yaml")
S3 = standard_structure(twist3.chart, "skew", TwistForm(twist3.twist))
print("closed twist passes:", verify(S3, "all", spec=SampleSpec(trials=2, degree=1)).passed)

# ... a non-closed one on R^4 breaks it, and only it
twist4 = parse_input(DATA / "twist4.yaml")
S4 = standard_structure(twist4.chart, "skew", TwistForm(twist4.twist))
rep = verify(S4, "all", spec=SampleSpec(trials=2, degree=1))
print("failing identities:", rep.failing())
f = S4.frame_sections
L, J, C = obstructions(S4, f[0], f[1], f[2])
print("on (d/dx, d/dy, d/dz): J =", format_value(J, S4.labels), " C =", format_value(C, S4.labels))

# the same twist written inline
S4b = standard_structure(twist4.chart, "skew", TwistForm(parse_form("w*dx^dy^dz", twist4.chart)))
print("same bracket:", S4b.rule(f[0], f[1]) == S4.rule(f[0], f[1]))
