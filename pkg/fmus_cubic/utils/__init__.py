"""
Utility functions and helpers for fmus-cubic.

This package contains input validation, random stream construction and the
small statistical helpers shared by the models.
"""
