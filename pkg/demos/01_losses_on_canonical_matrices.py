"""Loss values on the canonical example matrices.

Three 4x2 one-hot matrices share maximal confidence (every row is one-hot)
but differ in how evenly they spread samples over the two classes:

    P1 puts all four samples in class 1      (sizes 4, 0)
    P2 splits them three to one              (sizes 3, 1)
    P3 splits them evenly                    (sizes 2, 2)

The squares loss cannot tell them apart; the nuclear norm, class weighted
squares, and normalized squares all rank the balanced split highest.
"""

import numpy as np

from equimax import (
    EXAMPLES_4X2,
    class_sizes,
    cws,
    discriminability,
    equity_metric,
    ms,
    ns,
    nuclear_norm,
)

header = f"{'matrix':<8}{'sizes':<10}{'ms':>8}{'nuclear':>10}{'cws(0.5)':>10}{'ns(1,1,0)':>11}{'equity':>8}{'disc':>6}"
print(header)
print("-" * len(header))
for name in ("P1", "P2", "P3"):
    mat = np.asarray(EXAMPLES_4X2[name])
    sizes = tuple(int(s) for s in class_sizes(mat))
    print(
        f"{name:<8}{str(sizes):<10}"
        f"{ms(mat):>8.2f}{nuclear_norm(mat):>10.4f}{cws(mat, 0.5):>10.4f}"
        f"{ns(mat, 1.0, 1.0, 0.0):>11.4f}{equity_metric(mat):>8.2f}{discriminability(mat):>6.2f}"
    )

print()
print("Exact values: nuclear norms are 2, 1+sqrt(3), 2*sqrt(2);")
print("cws(0.5) is 1, (1+sqrt(3))/2, sqrt(2); ns(1,1,0) is 1/4, 2/5, 1/2.")
print()

# On one-hot matrices the nuclear norm factors through the class sizes:
# sum_c sqrt(n_c), which also equals C times cws at r = 0.5.
for name in ("P1", "P2", "P3"):
    mat = np.asarray(EXAMPLES_4X2[name])
    closed_form = np.sqrt(class_sizes(mat)).sum()
    print(
        f"{name}: nuclear={nuclear_norm(mat):.12f}  sum sqrt(sizes)={closed_form:.12f}  "
        f"C*cws(0.5)={2 * cws(mat, 0.5):.12f}"
    )
