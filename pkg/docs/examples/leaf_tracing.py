"""Characteristic leaves of a non-transitive structure: the contact structure
on R^3 times an inert line.  Leaves are the slices w = const."""

import io

from twisted_jacobi import DiffForm, TwistedContactData, from_twisted_contact, generators, rank_at, trace_leaf
from twisted_jacobi.expr import Chart
from twisted_jacobi.foliation import LeafControls, leaf_bracket_check, write_leaf_csv
from twisted_jacobi.structures import product_with_line

r3 = Chart(("x", "y", "z"))
contact = from_twisted_contact(TwistedContactData(DiffForm.from_components(r3, [-r3.coordinate(1), 0, 1]), DiffForm.zero(r3, 2)))
s = product_with_line(contact, "w")

print("generators:")
for g in generators(s):
    print("  ", g)
print("rank at (0,0,0,5):", rank_at(s, (0, 0, 0, 5)))

sample = trace_leaf(s, (0, 0, 0, 5), LeafControls(steps=1000))
drift = max(abs(p[3] - 5) for p in sample.points)
print(f"{len(sample.points)} steps, leaf dimension {sample.leaf_dimension}, max |w - 5| = {drift:.2e}")
for seg in sample.flow_log[:3]:
    print(f"  flowed H_{seg.function} for {seg.steps} steps")

# the leaf bracket only depends on the restrictions to the leaf
x, y, _, w = s.chart.coordinates()
dev = leaf_bracket_check(s, (0, 0, 0, 5), x, y, x + (w - 5), y + (w - 5) ** 2, sample)
print("bracket deviation between extensions:", dev)

buf = io.StringIO()
write_leaf_csv(sample, buf)
print(*buf.getvalue().splitlines()[:4], sep="\n")
