"""
Tests for latticesched.
"""
