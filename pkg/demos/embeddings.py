"""Monotone versus half-simplex versus GS_3 embeddability on small hypergraphs."""
import itertools

import numpy as np

from stabreg.embedding import check_halfsimplex_realizable, check_monotone, embed_into_gs3
from stabreg.generators import Hypergraph3, gen_halfsimplex_grid

grid = gen_halfsimplex_grid(2)
for n in (2, 3):
    print(f"2x2x2 half-simplex grid into GS_3({n}):", embed_into_gs3(grid, n).found)

# up-set of three cyclically shifted points: monotone, yet no half-simplex realization
E = np.zeros((3, 3, 3), bool)
for t in itertools.product(range(3), repeat=3):
    E[t] = any(all(a >= b for a, b in zip(t, g)) for g in [(2, 1, 0), (0, 2, 1), (1, 0, 2)])
H = Hypergraph3(((0, 1, 2),) * 3, E)
print("cyclic up-set monotone:", check_monotone(H).monotone,
      "realizable:", check_halfsimplex_realizable(H).realizable)
r = check_halfsimplex_realizable(gen_halfsimplex_grid(4))
print("4-point grid realizable with margin", r.margin, "values", [list(map(str, v)) for v in r.values])
