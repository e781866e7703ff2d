"""
Core components for the fmus-cubic library.

This package holds the protocol parameters and the window-growth laws that
every model builds on.
"""
