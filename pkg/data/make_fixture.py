"""Regenerate ``synthetic_glu_ghb.csv``.

Same column layout as the merged NHANES GLU_J/GHB_J extract (SEQN, LBXGLU,
LBXGH) but synthetic: Gumbel(theta=1.9) dependence with log-normal margins,
HbA1c rounded to 0.1 like the laboratory file, and a few blank cells.
"""

from pathlib import Path

import numpy as np
from scipy.stats import norm

from copula_tailrisk import CopulaModel, sample_dataset

N = 400
sample = sample_dataset(CopulaModel("gumbel", 1.9), N, seed=7)
glu = np.exp(np.log(100.0) + 0.25 * norm.ppf(sample.u))
ghb = np.exp(np.log(5.6) + 0.15 * norm.ppf(sample.v))

rows = ["SEQN,LBXGLU,LBXGH"]
rng = np.random.default_rng(11)
blank = set(rng.choice(N, size=6, replace=False).tolist())
for i in range(N):
    g = f"{glu[i]:.0f}"
    h = f"{ghb[i]:.1f}"
    if i in blank:
        if i % 2:
            g = ""
        else:
            h = ""
    rows.append(f"{93703 + i},{g},{h}")

Path(__file__).with_name("synthetic_glu_ghb.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
