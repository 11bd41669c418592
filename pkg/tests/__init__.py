"""
Test suite for the srs-weakness pipeline
"""
