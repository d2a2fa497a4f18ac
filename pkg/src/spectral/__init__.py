"""
Laplacian eigenbasis, graph Fourier transform and subspace diagnostics
"""
