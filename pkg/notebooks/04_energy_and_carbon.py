"""
Energy and CO2 for one workload under different power models
=============================================================
"""

# %%
from llmsim import CarbonSample, WorkloadTask, default_params, lookup_gpu, lookup_llm, simulate
from llmsim.catalog import POWER_MODELS
from llmsim.sustainability import grid_carbon_intensity

llm, gpu = lookup_llm("Llama-3-8B"), lookup_gpu("A10")
tasks = [WorkloadTask(i, 200 + 37 * (i % 20), 80 + 13 * (i % 11)) for i in range(400)]

# a dirty morning grid that cleans up after two hours
morning = grid_carbon_intensity([(820, 0.5), (490, 0.3), (12, 0.2)])
noon = grid_carbon_intensity([(820, 0.2), (490, 0.3), (12, 0.5)])
carbon = [CarbonSample(0, morning), CarbonSample(7200, noon)]
print(f"grid intensity {morning:.0f} -> {noon:.0f} g/kWh")

# %%
for kind in POWER_MODELS:
    s = simulate(tasks, llm, gpu, default_params().replace(power_model=kind, export_rate_s=0.5), carbon).summary
    print(f"{kind:16s} {s.total_energy_wh:8.1f} Wh  {s.total_co2_g:8.1f} g")

# %% [markdown]
# Finer export rates change the energy only slightly but cost more snapshots.

# %%
for rate in (5.0, 1.0, 0.1):
    s = simulate(tasks, llm, gpu, default_params().replace(export_rate_s=rate)).summary
    print(f"export {rate:4.1f} s  {s.fragment_count:8d} fragments  {s.total_energy_wh:.2f} Wh")
