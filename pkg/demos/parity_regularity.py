"""Build a regular partition for the four-point parity system and verify it exactly."""
from fractions import Fraction

import numpy as np

from stabreg.core import BudgetFn, WeightedPart
from stabreg.generators import gen_parity_system, philox, random_graph
from stabreg.regularity.construct import build_regular_partition_avg
from stabreg.regularity.verify import verify_strong_regularity

rng = philox(11)
g = [random_graph(rng, 8, 8) for _ in range(3)]
parts = [WeightedPart.uniform(range(8)) for _ in range(3)]
system = gen_parity_system(parts, *(np.argwhere(x).tolist() for x in g))
budget = BudgetFn.parse("exp:1/100")
res = build_regular_partition_avg(system, Fraction(1, 100), budget)
rep = verify_strong_regularity(system.to_function(), res.partition, Fraction(1, 100), budget)
print("sides per pair:", {e: res.partition.b(e) for e in res.partition.edges})
print("cells:", len(rep.cells), "passed:", rep.passed, "max exceptional:", rep.max_exceptional)
