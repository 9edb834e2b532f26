"""Suite report writers"""
