"""Writes the synthetic instances used by the reduction tests (tests/data)."""
import numpy as np
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data"


def instance(seed, n, k, shift):
    rng = np.random.default_rng(seed)
    s = (rng.random(n) < 0.4).astype(int)
    x = rng.normal(size=(n, k)) + shift * s[:, None]
    beta = rng.normal(size=k)
    z = x @ beta - 0.3 + 0.8 * s
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-z))).astype(int)
    return x, s, y


def write(name, x, s, y):
    for g in (0, 1):
        for c in (0, 1):
            assert ((s == g) & (y == c)).sum() >= 2, name
    cols = [f"x{j + 1}" for j in range(x.shape[1])]
    lines = [",".join(cols + ["s", "y"])]
    for row, g, c in zip(x, s, y):
        lines.append(",".join([f"{v:.6f}" for v in row] + [str(g), str(c)]))
    (OUT / name).write_text("\n".join(lines) + "\n")


OUT.mkdir(parents=True, exist_ok=True)
write("synthetic_a.csv", *instance(11, 60, 2, 0.5))
write("synthetic_b.csv", *instance(23, 80, 3, -0.4))
write("synthetic_c.csv", *instance(37, 40, 2, 1.0))
