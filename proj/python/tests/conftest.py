import os
import re

# OpenBLAS 0.3.20 misdetects some AVX-512 CPUs
try:
    with open("/proc/cpuinfo") as f:
        if re.search(r" avx2", f.read()):
            os.environ.setdefault("OPENBLAS_CORETYPE", "Haswell")
except OSError:
    pass
