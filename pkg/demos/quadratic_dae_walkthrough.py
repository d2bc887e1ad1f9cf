"""Lift and reduce the two-state quadratic DAE, step by step.

Run:  python demos/quadratic_dae_walkthrough.py
"""
import numpy as np

from daecarleman import analyze, assemble, kron_reduce, load_fixture, ode_from_coefficients

np.set_printoptions(precision=4, suppress=True, linewidth=120)

model = load_fixture("test1")
eq, coeffs = analyze(model)
print(f"{model.name}: {model.N} states, {model.M} algebraic")
print("equilibrium x =", eq.x_sep, " z =", eq.z_sep)
print("det dh/dz =", coeffs.det_H14)

lifted = assemble(coeffs, order=2)
print("\nlifted system, columns x, x(x)x, z, x(x)z, z(x)z:")
print(lifted.full)

red = kron_reduce(lifted)
print("\nafter eliminating the algebraic block:")
print(red.Ftilde11)
print("z ~", red.htilde[1], "dx")

# substituting z = x1 - x2 by hand gives an ODE; its Carleman matrix must agree
ref = ode_from_coefficients(analyze(load_fixture("test1-ode"))[1], 2)
gap = np.abs(red.condensed() - ref.condensed()).max()
print(f"\ncondensed difference from the substituted ODE: {gap:.1e}")
