"""
Test package for the anatomy contrastive lab.
"""
