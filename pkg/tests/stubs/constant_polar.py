"""Stub solver: c_l/c_d = 100 at every angle. Checks the shape file layout."""
import sys

coords = [tuple(map(float, line.split())) for line in open(sys.argv[1]) if line.strip()]
assert abs(coords[0][0] - 1.0) < 1e-9 and abs(coords[-1][0] - 1.0) < 1e-9, "must start and end at the trailing edge"
assert min(c[0] for c in coords) == 0.0
with open(sys.argv[2], "w") as fh:
    fh.write("alpha,cl,cd\n")
    for a in range(11):
        fh.write(f"{a},1.0,0.01\n")
