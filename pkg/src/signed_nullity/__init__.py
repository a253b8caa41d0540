"""Signed graphs with maximum nullity at most two."""
