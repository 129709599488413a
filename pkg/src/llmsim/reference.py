"""Measured single-prompt latencies for Llama-3.1-8B served by vLLM on one A10.

Median values over repeated requests; used to validate the latency model.
"""

import numpy as np

# prompt size (tokens), median latency (s), median throughput (tokens/s)
PREFILL_MEASUREMENTS = np.array([
    (64, 0.054, 1192),
    (128, 0.072, 1776),
    (256, 0.123, 2095),
    (512, 0.213, 2408),
    (1024, 0.436, 2349),
    (2048, 0.819, 2501),
    (4096, 1.749, 2354),
    (8192, 3.860, 2127),
    (16384, 7.347, 2230),
])

# requested size, median response size (tokens), median latency (s), median throughput
DECODE_MEASUREMENTS = np.array([
    (64, 53, 2.3, 22.5),
    (128, 106, 4.5, 23.1),
    (256, 206, 9.0, 22.8),
    (512, 409, 18.1, 23.0),
    (1024, 769, 36.3, 21.9),
    (2048, 1838, 73.0, 25.1),
    (4096, 3109, 147.2, 20.7),
    (8192, 6585, 299.5, 21.9),
    (16384, 13940, 617.6, 22.5),
])
