"""
Kernels, performance model, guided sparsity learning, training and benchmarking.
"""
