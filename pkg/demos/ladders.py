"""Half graphs have long ladders; a noisy copy loses them as delta grows."""
from fractions import Fraction

import numpy as np

from stabreg.core import PartiteFunction, WeightedPart
from stabreg.generators import philox
from stabreg.stability import max_ladder_exact, max_ladder_greedy

n = 7
X = WeightedPart.uniform(range(n))
half = PartiteFunction.from_fractions((X, X), [[Fraction(int(i > j)) for j in range(n)] for i in range(n)])
print("half graph, delta=1/2:", max_ladder_exact(half, Fraction(1, 2))[0])

rng = philox(3)
noisy = [[Fraction(int(i > j)) * Fraction(3, 4) + Fraction(int(v), 4) for j, v in enumerate(row)]
         for i, row in enumerate(rng.integers(0, 2, size=(n, n)))]
f = PartiteFunction.from_fractions((X, X), noisy)
for delta in ("0", "1/4", "1/2", "3/4"):
    exact, w = max_ladder_exact(f, delta)
    greedy, _ = max_ladder_greedy(f, delta, seed=0)
    print(f"noisy, delta={delta}: exact {exact}, greedy {greedy}, alpha {w.alpha}")
