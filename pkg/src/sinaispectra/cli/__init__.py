"""
Presentation Layer (CLI)

This layer contains the command-line interface and command handlers.
It depends on all other layers (services, infrastructure, domain).
"""
