"""Built-in figure scenarios (fidelity, entropies, normalized indices, slab response)."""

from pathlib import Path

import numpy as np

from . import __version__
from .device_response import DeviceResponse, LorentzParams
from .scenario import FigureDataset, emit_figures, parse_config, run_scenario

FIG1_Q = (0.1, 1.0, 2.0)
FIG3_Q = (0.1, 2.0, 3.0)
FIG4_Q = (0.5, 1.0, 2.0)
SLAB = LorentzParams(eps_s=1.5, gamma_ratio=0.01, thickness=2.0)

_FIG1 = """
[state]
kind = tmsv
q_abs = {q}
[channel_a]
kind = abstract
[channel_d]
kind = ideal
[sweep]
variable = channel_a.ov
min = 0
max = 1
points = 101
[output]
name = fig1_q{q}
"""

_FIG2_3 = """
[state]
kind = tmsv
q_abs = {q}
[channel_a]
kind = abstract
[channel_d]
kind = ideal
[sweep]
variable = channel_a.n2
min = 0
max = 1
points = 101
[output]
name = {name}
normalize_indices = {norm}
"""

_FIG4 = """
[state]
kind = tmsv
q_abs = {q}
[channel_a]
kind = device
device = lorentz_slab
eps_s = {eps_s}
gamma_ratio = {gamma}
thickness = {d}
phase_reference = vacuum
branch = {branch}
pulse = narrowband
mid_freq = 1
[channel_d]
kind = ideal
[sweep]
variable = channel_a.mid_freq
min = 0.2
max = 2.2
points = 401
[output]
name = fig4_{branch}_q{q}
"""


def builtin_configs():
    """Scenario configs for every built-in figure dataset."""
    texts = [_FIG1.format(q=q) for q in FIG1_Q]
    texts.append(_FIG2_3.format(q=2.0, name="fig2_q2.0", norm="false"))
    texts += [_FIG2_3.format(q=q, name=f"fig3_q{q}", norm="true") for q in FIG3_Q]
    texts += [
        _FIG4.format(
            q=q, branch=b, eps_s=SLAB.eps_s, gamma=SLAB.gamma_ratio, d=SLAB.thickness
        )
        for b in ("transmitted", "reflected")
        for q in FIG4_Q
    ]
    return [parse_config(t) for t in texts]


def slab_response_dataset(params=SLAB, lo=0.2, hi=2.2, points=401):
    """Amplitude and phase of the slab coefficients over the swept band."""
    w = np.linspace(lo, hi, points)
    T, R = DeviceResponse.lorentz_slab(params)(w)
    T_vac = DeviceResponse.lorentz_slab(params, "vacuum").transmission(w)
    header = [
        f"pulsecorr {__version__}",
        f"slab: eps_s = {params.eps_s}, gamma_ratio = {params.gamma_ratio}, "
        f"thickness = {params.thickness}",
        "arg_T, arg_R: phases referred to the slab faces (T includes exp(i n w d))",
        "arg_T_vacuum: transmission phase relative to free propagation over the slab thickness",
    ]
    columns = ("omega", "abs_T", "arg_T", "arg_T_vacuum", "abs_R", "arg_R")
    rows = [
        (w[i], abs(T[i]), np.angle(T[i]), np.angle(T_vac[i]), abs(R[i]), np.angle(R[i]))
        for i in range(points)
    ]
    return FigureDataset("fig4ab_slab_response", header, columns, rows)


def builtin_figures(out_dir, formats=("csv",), threads=1):
    """Run all built-in scenarios and write them to ``out_dir``."""
    out_dir = Path(out_dir)
    paths = emit_figures(slab_response_dataset(), out_dir, formats=())
    for config in builtin_configs():
        paths += emit_figures(run_scenario(config, threads=threads), out_dir, formats)
    return paths
