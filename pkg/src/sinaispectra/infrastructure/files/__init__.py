"""Environment, potential, path and certificate files"""
