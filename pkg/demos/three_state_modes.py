"""Modes and time response of the three-state trigonometric DAE.

Writes ``three_state_response.csv`` (nonlinear and lifted first state) to
the current directory.

Run:  python demos/three_state_modes.py
"""
import numpy as np

from daecarleman import (
    analyze,
    carleman_dae,
    combination_spectrum,
    compare,
    condensed_state_matrix,
    eigenvalues,
    load_fixture,
    match_spectra,
    mode_report,
    simulate_dae,
    simulate_linear,
)

model = load_fixture("test3")
eq, coeffs = analyze(model)
lam = eigenvalues(coeffs.reduced_jacobian())
rep = mode_report(lam)
print("linear modes:")
for l, f, d in zip(rep.eigenvalues, rep.frequencies, rep.dampings):
    hz = "   -   " if np.isnan(f) else f"{f:.4f}"
    print(f"  {l.real:+.4f} {l.imag:+.4f}j   {hz} Hz   damping {100 * d:6.2f} %")

for order in (2, 3):
    A = condensed_state_matrix(carleman_dae(coeffs, order)[1].Ftilde11, model.N, order)
    m = match_spectra(eigenvalues(A), combination_spectrum(lam, order))
    print(f"order {order}: {A.shape[0]} condensed modes, worst distance to eigenvalue sums {m.max_distance:.1e}")

dx = np.full(model.N, -0.05)
ref = simulate_dae(model, eq.x_sep + dx, 10.0, 0.01, z_guess=eq.z_sep)
cols = [ref.times, ref.states[:, 0]]
print("\nRMS error against the nonlinear run:")
for order in (1, 2, 3):
    tr = simulate_linear(carleman_dae(coeffs, order)[1].Ftilde11, dx, model.N, order, 10.0, 0.01, eq.x_sep)
    cols.append(tr.states[:, 0])
    print(f"  order {order}:", "  ".join(f"{e:.3e}" for e in compare(tr, ref).rms))

np.savetxt("three_state_response.csv", np.column_stack(cols), delimiter=",",
           header="t,nonlinear,order1,order2,order3", comments="")
