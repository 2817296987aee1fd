"""Time the ascent kernel: compiled extension vs numpy reference.

The kernel works in the reduced interference basis, so its cost tracks
the number of LUE/EUE pairs rather than the element count; array size
only enters through the one-off projection done before the loop.

Usage: python3 benchmarks/bench_backends.py [--repeats 20]
"""
import argparse
import time

import numpy as np

from nfsec import (PrecodingState, ScenarioConfig, build_channels,
                   generate_scenario, null_space_an)
from nfsec._core import BACKEND, solve_ascent_with
from nfsec.precoding import rzf_init
from nfsec.sca import build_problem, reduced_basis, scaled_rows

TAUS = np.array([1.0, 0.1, 0.01, 1e-3])

CASES = [
    ("3x3  k=2 e=2", dict(n_x=3, n_z=3, k_lues=2, e_eues=2,
                          lue_distance=(8.0, 20.0), min_theta_sep=0.7)),
    ("5x5  k=3 e=3", dict(n_x=5, n_z=5, k_lues=3, e_eues=3,
                          lue_distance=(8.0, 20.0), min_theta_sep=0.5)),
    ("9x9  k=4 e=4", dict(n_x=9, n_z=9, k_lues=4, e_eues=4)),
]


def make_problem(cfg_kw, seed=3):
    cfg = ScenarioConfig(collinear=False, **cfg_kw)
    scn = generate_scenario(cfg, seed=seed)
    ch = build_channels(scn)
    w = rzf_init(ch.h_b, scn.sigma2)
    v = null_space_an(ch.h_b)
    state = PrecodingState(w=w, v=v, epsilon=0.6, p_b=scn.p_b)
    rows_sc = scaled_rows(ch, state, scn.sigma2)
    q = reduced_basis(ch)
    prob, y0, _ = build_problem(rows_sc, q, w, cfg.k_lues, "s2")
    return prob, y0


def median_ms(backend, prob, y0, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = solve_ascent_with(backend, prob, y0, TAUS)
        times.append(time.perf_counter() - t0)
    return 1e3 * float(np.median(times)), res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    print(f"import-time backend: {BACKEND}")
    try:
        solve_ascent_with("compiled", *make_problem(CASES[0][1]), TAUS)
        have_ext = True
    except RuntimeError:
        have_ext = False
        print("compiled kernel not built: timing the python path only")

    hdr = f"{'case':<14} {'python ms':>10}"
    if have_ext:
        hdr += f" {'compiled ms':>12} {'speedup':>8}"
    print(hdr)
    for label, kw in CASES:
        prob, y0 = make_problem(kw)
        t_py, r_py = median_ms("python", prob, y0, args.repeats)
        line = f"{label:<14} {t_py:>10.3f}"
        if have_ext:
            t_cy, r_cy = median_ms("compiled", prob, y0, args.repeats)
            line += f" {t_cy:>12.3f} {t_py / t_cy:>7.1f}x"
            if abs(r_py.xi - r_cy.xi) > 1e-8 * max(1.0, abs(r_py.xi)):
                line += "  (!! margins disagree)"
        print(line)


if __name__ == "__main__":
    main()
