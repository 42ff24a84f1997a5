"""
The nswiener command line
=========================

Writes a stationary operator file, factors it, verifies the factor, and shows
the positivity gate on an indefinite operator. Runs the same entry point as
the installed ``nswiener`` script.
"""

import json
import tempfile
from pathlib import Path

from nswiener import IndexWindow, NSOperator, shift
from nswiener.cli import main, write_operator
from nswiener.diag_core import restrict

tmp = Path(tempfile.mkdtemp())

W = NSOperator.stationary(IndexWindow(-20, 20), {0: 1.25, 1: 0.5, -1: 0.5})
write_operator(W, tmp / "w.json")
print((tmp / "w.json").read_text()[:200], "...")

###############################################################################
# nswiener factor w.json st --pad 10
code = main(["factor", str(tmp / "w.json"), str(tmp / "st"), "--pad", "10"])
print("exit", code)
report = json.loads((tmp / "st.report.json").read_text())
print("accepted", report["accepted_window"], "residual", report["reconstruction_residual"])

###############################################################################
# nswiener verify w.json st.factor.json --t-samples 0,1.57,3.0
print("exit", main(["verify", str(tmp / "w.json"), str(tmp / "st.factor.json"),
                    "--t-samples", "0,1.57,3.0"]))

###############################################################################
# Z + Z* has symbol 2 cos t, which changes sign: exit code 4
w = IndexWindow(0, 20)
write_operator(restrict(shift(1, w) + shift(1, w).H, w), tmp / "zz.json")
print("exit", main(["factor", str(tmp / "zz.json"), str(tmp / "zz")]))
