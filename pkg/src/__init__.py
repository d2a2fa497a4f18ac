"""
Graph signal quantization with single-shot noise shaping
"""
