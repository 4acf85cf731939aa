"""
Transitive Courant algebroids through a splitting
=================================================

When the anchor is onto, E splits as Q + im d + C.  A suitable connection
then rebuilds the bracket from its components, and the known brackets on
TM + T*M come back out.
"""

from pathlib import Path

from courant.calculus import Bivector, MetricOnTM
from courant.core import SampleSpec
from courant.generalized import bialgebroid_bracket, GeneralizedSection, poisson_structure, standard_structure
from courant.sampling import random_sections
from courant.structfile import parse_input
from courant import transitive as tr

DATA = Path(__file__).parent / "data"


def show(T):
    for name, vecs in (("K", T.K), ("Q", T.Q), ("im d", T.D), ("C", T.C)):
        print(f"  {name}:", "; ".join("(" + ", ".join(map(str, v)) + ")" for v in vecs) or "0")


# TM + T*M: Q = TM, K = im d = T*M, nothing left for C
sf = parse_input(DATA / "standard2.yaml")
S = standard_structure(sf.chart)
T = tr.decompose(S)
print("standard:")
show(T)
N = tr.suitable_connection(T)
S1 = tr.bracket1(T, N)
pairs = random_sections(sf.chart, 4, 20, seed=3)
print("  bracket1 == Courant:", all(S1.rule(u, v) == S.rule(u, v) for u, v in zip(pairs[::2], pairs[1::2])))

# Poisson anchor Id + sharp_P: K is the graph of -sharp_P
sf = parse_input(DATA / "poisson.yaml")
P = Bivector(sf.chart, sf.bivector)
T = tr.decompose(poisson_structure(P))
print("Poisson:")
show(T)
S1 = tr.bracket1(T, tr.suitable_connection(T))
u, v = random_sections(sf.chart, 4, 2, degree=1, seed=4)
gs = lambda e: GeneralizedSection.from_esection(sf.chart, e)
print("  bracket1 == bialgebroid:", gs(S1.rule(u, v)) == bialgebroid_bracket(gs(u), gs(v), P))

# TM + T*M + TM with a curved Riemannian metric G on the last summand:
# a pre-Courant structure whose C-connection is not flat
sf = parse_input(DATA / "triple.yaml")
S, T, N, Lam = tr.riemannian_triple_data(MetricOnTM(sf.chart, sf.tm_metric))
print("Riemannian triple:")
show(T)
res = tr.component_conditions(T, N, None, spec=SampleSpec(trials=1, degree=1))
for kind, items in res.items():
    print(f"  {kind}:", "holds" if not items else f"fails on {len(items)} sampled argument(s)")
print(tr.restricted_check(T, N, None, spec=SampleSpec(trials=1, degree=1)))
