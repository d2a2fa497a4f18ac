"""
Error functionals, exceptions and logging helpers
"""
