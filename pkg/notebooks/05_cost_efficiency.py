"""
Cost per token and time-weighted efficiency
===========================================
"""

# %%
from llmsim import default_params, lookup_gpu, lookup_llm
from llmsim.efficiency import efficiency_report, financial_efficiency_ratio, time_squared_ratio
from llmsim.performance import prefill_time, token_timing

llm = lookup_llm("Llama-3-8B")
params = default_params()

# %% [markdown]
# One million requests of 500 prompt / 300 response tokens on two GPUs.
# Hourly prices are examples; pass your own.

# %%
reports = {}
for name, price in (("A10", 1.2), ("A100-80GB", 3.7)):
    gpu = lookup_gpu(name)
    t_p = 1e6 * prefill_time(llm, gpu, params, 500)
    t_d = 1e6 * 300 * token_timing(llm, gpu, params).per_token_s
    rep = efficiency_report(5e8, 3e8, t_p, t_d, price, energy_wh=0.0)
    reports[name] = rep
    print(f"{name:10s} {rep.total_time_s / 3600:8.0f} GPU h  ${rep.total_cost:9.0f}  "
          f"${rep.cost_per_mtoken:.3f}/M tokens  eff {rep.financial_eff:.3g}")

# %%
r = financial_efficiency_ratio(reports["A100-80GB"].financial_eff, reports["A10"].financial_eff)
print(f"A100 vs A10 time-weighted efficiency ratio: {r:.3f}")

# simulating instead of measuring: 0.6 h of compute vs 2500 GPU hours
print(f"simulation vs measurement: 1:{1 / time_squared_ratio(0.6, 2500):,.0f}")
