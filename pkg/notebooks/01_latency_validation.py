"""
Latency model against measured vLLM runs
=========================================

Llama-3-8B on a single A10, default efficiencies.
"""

# %%
import numpy as np

from llmsim import default_params, lookup_gpu, lookup_llm
from llmsim.efficiency import mape
from llmsim.performance import decode_time, prefill_time, token_timing
from llmsim.reference import DECODE_MEASUREMENTS, PREFILL_MEASUREMENTS

llm, gpu, params = lookup_llm("Llama-3-8B"), lookup_gpu("A10"), default_params()

# %% [markdown]
# Prefill is compute bound, so latency grows linearly with the prompt.

# %%
sizes = PREFILL_MEASUREMENTS[:, 0]
sim = prefill_time(llm, gpu, params, sizes)
for n, real, s in zip(sizes, PREFILL_MEASUREMENTS[:, 1], sim):
    print(f"{int(n):6d} tokens  measured {real:6.3f} s  simulated {s:6.3f} s")
print(f"prefill MAPE {mape(PREFILL_MEASUREMENTS[:, 1], sim):.2f}%")

# %% [markdown]
# Decode: the per-token time is the larger of the compute and memory bounds.

# %%
t = token_timing(llm, gpu, params)
print(f"compute bound {t.compute_bound_s * 1e3:.3f} ms, memory bound {t.memory_bound_s * 1e3:.3f} ms")
print(f"=> {t.tokens_per_s:.1f} tokens/s")

sim = decode_time(params, t, DECODE_MEASUREMENTS[:, 1])
print(f"decode MAPE {mape(DECODE_MEASUREMENTS[:, 2], sim):.2f}%")

# %%
# sweep the compute efficiency to see how sensitive prefill is
for ce in np.linspace(0.2, 0.4, 5):
    p = params.replace(compute_efficiency=float(ce))
    err = mape(PREFILL_MEASUREMENTS[:, 1], prefill_time(llm, gpu, p, sizes))
    print(f"C_e={ce:.2f}  MAPE {err:5.2f}%")
