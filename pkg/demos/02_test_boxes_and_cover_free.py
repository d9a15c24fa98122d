"""Points that hit every structured test box give a cover-free family."""

from mindisp.construction import (enumerate_test_family, extract_family, family_size, hits_all,
                                  k_of_eps, test_box, test_box_volume)
from mindisp.coverfree import SetFamily, certify_cover_free
from mindisp.generators import greedy_hitting, superimposed_points

d, eps = 16, 1 / 8
bucket = k_of_eps(eps)
print(f"eps={eps}: k={bucket.k}, r={bucket.r}, threshold {bucket.threshold}, "
      f"{family_size(d, bucket.k)} test boxes in dimension {d}")

spec = next(enumerate_test_family(d, bucket.k))
box = test_box(spec)
print("first box:", sorted(spec.A), spec.j, "volume", test_box_volume(spec))
print("  bounds on the first four axes:", [(str(a), str(b)) for a, b in
                                           zip(box.lo[:4], box.hi[:4])])

# a deterministic hitting set and a random one
for xs in (greedy_hitting(d, bucket.k), superimposed_points(d, bucket.k, 90, seed=4)):
    ok, missing = hits_all(xs, d, bucket.k)
    line = f"{xs.provenance}: {len(xs)} points, hits every box: {ok}"
    if ok:
        cert = certify_cover_free(extract_family(xs, bucket.k), bucket.r)
        line += f"; family is {bucket.r}-cover-free: {cert.certified}"
    else:
        line += f"; first missed box A={sorted(missing.A)} j={missing.j}"
    print(line)

# a small family that is not 1-cover-free: the second set sits inside the first
fam = SetFamily.from_lists(2, [{0, 1}, {0}, {1}])
cert = certify_cover_free(fam, 1)
print("subset family:", cert.verdict, "refutation", cert.refutation,
      "cover numbers", cert.cover_numbers)
