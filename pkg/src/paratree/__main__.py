import os
import sys

threads = os.environ.get("PARATREE_THREADS")
if threads:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
        os.environ.setdefault(var, threads)


def main():
    from .cli import main as run
    return run()


if __name__ == "__main__":
    sys.exit(main())
