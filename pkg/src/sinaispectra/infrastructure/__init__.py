"""
Infrastructure Layer

File formats, report writers and console output. Depends on the domain
layer only.
"""
