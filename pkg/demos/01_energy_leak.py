"""Why a plain CUSUM scan fails near a strong oscillation.

A steady tone at omega0 = 0.6 pi has no change points, yet the CUSUM
contrast |C_n(i, omega)| is large in a whole frequency band around
omega0: partial Fourier sums at nearby frequencies grow like
1/|omega - omega0| before cancelling. The field is tiny at omega0
itself. This spectral energy leak is what the local contrast statistic
of the second stage is designed to avoid.
"""

import numpy as np

from oscdetect import cusum_field
from oscdetect.dataio import write_matrix_csv

n = 1000
omega0 = 0.6 * np.pi
x = np.cos(omega0 * np.arange(1, n + 1))

freqs = np.linspace(omega0 - 60 * np.pi / n, omega0 + 60 * np.pi / n, 121)
field = cusum_field(x, freqs, stride=2)
write_matrix_csv("energy_leak_heatmap.csv", "i", field.indices, field.freqs,
                 field.values)

at_tone = field.values[:, np.argmin(np.abs(freqs - omega0))].max()
band = np.abs(freqs - omega0) >= 10 * np.pi / n
print(f"max |C| at the tone frequency: {at_tone:.3f} (uniformly small)")
print(f"max |C| in the leak band:      {field.values[:, band].max():.3f}")
print("wrote energy_leak_heatmap.csv")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.figure(figsize=(9, 3))
    plt.imshow(field.values.T, aspect="auto", origin="lower",
               extent=[field.indices[0], field.indices[-1], freqs[0], freqs[-1]])
    plt.axhline(omega0, color="w", ls="--", lw=0.8)
    plt.xlabel("time index i")
    plt.ylabel("frequency (rad)")
    plt.title("CUSUM field |C_n(i, w)| around a steady tone")
    plt.colorbar(label="|C|")
    plt.tight_layout()
    plt.savefig("energy_leak_heatmap.png", dpi=120)
    print("wrote energy_leak_heatmap.png")
except ImportError:
    pass
