import os

# keep BLAS single-threaded: the matrices here are tiny, threads only add
# overhead and nondeterministic reduction orders
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
