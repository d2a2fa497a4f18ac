"""
Experiment runners and result persistence
"""
