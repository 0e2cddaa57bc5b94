# tests/conftest.py
import os

SEED = 20240
ACCEPTANCE = os.environ.get("SCHROTBC_ACCEPTANCE") == "1"
ACCEPTANCE_REASON = "desk-scale acceptance run; set SCHROTBC_ACCEPTANCE=1"

# a few seconds per run at most
TINY = dict(n_lgl=24, n_fourier=8, nt=5, tmax=0.05)

VARIANTS_2D = [(s, m) for s in ("CQ", "NP20", "NP50", "CP20", "CP50", "HF") for m in ("BDF1", "TR")]
VARIANTS_3D = [("NP50", "BDF1"), ("NP50", "TR")]
