"""
Graphs, point clouds and graph signals
"""
