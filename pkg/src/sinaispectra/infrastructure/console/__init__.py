"""Console output helpers"""
