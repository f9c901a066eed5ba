"""Convex billiard tables glued from matched symmetric blocks."""
__version__ = '0.1.0'
