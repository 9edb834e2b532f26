"""sinai-spectra tests"""
