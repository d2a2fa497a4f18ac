"""
Alphabets, memoryless scalar quantization, single-shot noise shaping and baselines
"""
