"""
What switching off the KV cache costs
======================================
"""

# %%
import numpy as np

from llmsim import default_params, lookup_gpu, lookup_llm
from llmsim.cache import kv_cache_bytes
from llmsim.performance import decode_time, token_timing

llm, gpu = lookup_llm("Llama-3-8B"), lookup_gpu("A10")
on = default_params()
off = on.replace(kv_cache_enabled=False)
t = token_timing(llm, gpu, on)

# %% [markdown]
# Without the cache every step re-reads all previous tokens: n(n+1)/2 steps instead of n.

# %%
for n in (10, 100, 1000, 10_000):
    a, b = decode_time(on, t, n), decode_time(off, t, n)
    print(f"n={n:6d}  on {a:10.1f} s  off {b:12.1f} s  ratio {b / a:8.1f}")

# %%
rng = np.random.default_rng(0)
n_out = np.maximum(1, np.rint(rng.lognormal(5.3, 0.8, 50_000)))
ratio = decode_time(off, t, n_out).sum() / decode_time(on, t, n_out).sum()
print(f"synthetic trace, mean {n_out.mean():.0f} tokens: off/on = {ratio:.0f}x")

# %% [markdown]
# The price of keeping it: memory.

# %%
print(f"{kv_cache_bytes(llm, 1):,} bytes per token")
print(f"8k context: {kv_cache_bytes(llm, 8192) / 2**30:.2f} GiB")
print(f"1M sessions x 64 prompts x 69.5 tokens: {kv_cache_bytes(llm, 69.5 * 64 * 1e6) / 1e15:.2f} PB")
