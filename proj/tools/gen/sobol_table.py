# Emits src/sobol_table.inc from the Joe-Kuo direction numbers bundled with scipy.
import sys
import numpy as np
from scipy.stats import qmc
import scipy.stats as st, os

DIMS, BITS = 64, 32
path = os.path.join(os.path.dirname(st.__file__), "_sobol_direction_numbers.npz")
dn = np.load(path)
poly, vinit = dn["poly"], dn["vinit"]

v = np.zeros((DIMS, BITS), dtype=np.uint64)
v[0, :] = 1
for d in range(1, DIMS):
    p = int(poly[d]); m = p.bit_length() - 1
    v[d, :m] = vinit[d, :m]
    for j in range(m, BITS):
        nv = int(v[d, j - m]); pow2 = 1
        for k in range(m):
            pow2 <<= 1
            if (p >> (m - 1 - k)) & 1:
                nv ^= pow2 * int(v[d, j - k - 1])
        v[d, j] = nv
for j in range(BITS):
    v[:, j] <<= np.uint64(BITS - 1 - j)

# self-check against scipy for the first 4096 points
n = 4096
ref = qmc.Sobol(DIMS, scramble=False).random(n)
x = np.zeros(DIMS, dtype=np.uint64); out = np.zeros((n, DIMS))
for i in range(1, n):
    g = i ^ (i >> 1)
    x[:] = 0
    b = 0
    while g:
        if g & 1: x ^= v[:, b]
        g >>= 1; b += 1
    out[i] = x / 2.0**32
assert np.array_equal(out, ref), "mismatch"

with open(sys.argv[1], "w") as f:
    f.write("// generated by tools/gen/sobol_table.py (new-joe-kuo-6.21201)\n")
    f.write(f"constexpr int kSobolDims = {DIMS};\nconstexpr int kSobolBits = {BITS};\n")
    f.write("constexpr std::uint32_t kSobolV[kSobolDims][kSobolBits] = {\n")
    for d in range(DIMS):
        f.write("  {" + ", ".join(f"0x{int(a):08x}u" for a in v[d]) + "},\n")
    f.write("};\n")
