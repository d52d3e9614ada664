"""
See `kronprec.api` for the publically importable API.
"""
