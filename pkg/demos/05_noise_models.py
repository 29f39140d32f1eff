"""The four benchmark noise recursions eps_k = a(k/n) eps_{k-1} + e_k.

M1/M4 drift smoothly; M2/M3 switch generating mechanism abruptly at
interior break points (piecewise local stationarity). M4 uses raw
Student-t(5) innovations.
"""

import numpy as np

import oscdetect as od
from oscdetect.dataio import write_columns_csv

n = 2000
models = {name: od.NoiseModel.named(name) for name in ("M1", "M2", "M3", "M4")}
t = np.arange(1, n + 1) / n

cols, names = [t], ["t"]
for name, model in models.items():
    cols.append(model.coefficient(t))
    names.append(f"coef_{name}")
    cols.append(od.simulate_noise(model, n, seed=5))
    names.append(f"path_{name}")
write_columns_csv("noise_models.csv", names, cols)

for name, model in models.items():
    eps = od.simulate_noise(model, n, seed=5)
    print(f"{name}: sup|a| = {model.stability_margin():.3f}, "
          f"sd = {eps.std():.3f}, innovation = {model.innovation}")
print("wrote noise_models.csv")
