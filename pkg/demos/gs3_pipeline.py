"""Sample a monotone piece of GS_3(n), partition it, verify, then break it on purpose."""
from stabreg.embedding import sample_common_sub
from stabreg.gs3.partition import analyze, merge_parts
from stabreg.gs3.rfamily import PAIRS, verify_two_direction_claim
from stabreg.gs3.verify import corrupting_merge, verify_triple_homogeneity

res = sample_common_sub(2, 4, (40, 40, 40), zero_fraction="1/4")
print("part sizes:", [len(p.labels) for p in res.instance.parts], "acceptance:", round(res.acceptance_rate, 3))
a = analyze(res.instance)
for key in PAIRS:
    P = a.partitions[key]
    print(f"pair {key[0] + 1},{key[1] + 1}:", P.census)
print("two-direction violations:", len(verify_two_direction_claim(a.ctx)))
rep = verify_triple_homogeneity(a.ctx, a.partitions)
print("homogeneous:", rep.passed, "cells checked:", len(rep.cells))

plan = corrupting_merge(rep)
if plan:
    parts = dict(a.partitions)
    for slot, (p, q) in plan.items():
        parts[PAIRS[slot]] = merge_parts(parts[PAIRS[slot]], p, q)
    bad = verify_triple_homogeneity(a.ctx, parts)
    print("after merging", plan, "->", "passed" if bad.passed else f"fails, witness {bad.failures[0].witness}")
