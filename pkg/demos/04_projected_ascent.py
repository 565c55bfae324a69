"""Multi-start projected gradient ascent on each loss.

Starts are drawn flat on the product of row simplices; each step follows
the analytic gradient of the negated loss and re-projects every row.  For
the equity-aware losses the best iterate should be one-hot with balanced
class sizes; for the squares loss any one-hot matrix is optimal.
"""

import numpy as np

from equimax import class_sizes, is_one_hot_rows
from equimax.losses import LossConfig
from equimax.optimizer import AscentConfig, maximize

N_ROWS, N_COLS = 6, 3
cfg = AscentConfig(inits=48, steps=800, seed=0xE0517)

losses = [
    ("ms", LossConfig("ms")),
    ("bnm", LossConfig("bnm")),
    ("cwsm r=0.5", LossConfig("cwsm", r=0.5)),
    ("nsm r=1", LossConfig("nsm", r=1.0, alpha=1.0, epsilon=0.0)),
    ("nsm r=0.5", LossConfig("nsm", r=0.5, alpha=1.0, epsilon="auto")),
]

print(f"maximizing negated losses over {N_ROWS}x{N_COLS} prediction matrices, {cfg.inits} starts\n")
for name, loss_cfg in losses:
    res = maximize(loss_cfg, N_ROWS, N_COLS, cfg)
    sizes = np.round(class_sizes(res.best_matrix), 6)
    spread = res.final_values.max() - res.final_values.min()
    print(
        f"{name:<12} best={res.best_value:.8f} one-hot={is_one_hot_rows(res.best_matrix, 1e-6)} "
        f"sizes={sizes} start-spread={spread:.2e} halvings={res.halving_events}"
    )

print()
print("best matrix under cwsm r=0.5:")
res = maximize(LossConfig("cwsm", r=0.5), N_ROWS, N_COLS, cfg)
print(np.round(res.best_matrix, 6))
print("two samples per class: the balanced split of 6 over 3.")
