"""Reference matrices and values frozen as expectations."""
import numpy as np

# test1: second-order Carleman matrix of the substituted ODE
TEST1_ODE_ORDER2 = np.array([
    [-1.9, -0.6, 0.2, 0, 0, 0],
    [-2.1, -2.1, 0.3, 0.05, 0.05, -0.15],
    [0, 0, -3.8, -0.6, -0.6, 0],
    [0, 0, -2.1, -4, 0, -0.6],
    [0, 0, -2.1, 0, -4, -0.6],
    [0, 0, 0, -2.1, -2.1, -4.2],
])

# test1: lifted DAE matrix at order 2, columns x, xx, z, xz, zz
TEST1_DAE_ORDER2 = np.array([
    [-2, -0.5, 0.2, 0, 0, 0, 0.1, 0, 0, 0],
    [-2, -2.2, 0.3, 0.05, 0.05, -0.15, -0.1, 0, 0, 0],
    [0, 0, -4, -0.5, -0.5, 0, 0, 0.2, 0, 0],
    [0, 0, -2, -4.2, 0, -0.5, 0, -0.1, 0.1, 0],
    [0, 0, -2, 0, -4.2, -0.5, 0, -0.1, 0.1, 0],
    [0, 0, 0, -2, -2, -4.4, 0, 0, -0.2, 0],
    [-1, 1, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, -1, 0, 1, 0, 0, 1, 0, 0],
    [0, 0, 0, -1, 0, 1, 0, 0, 1, 0],
    [0, 0, 1, -1, -1, 1, 0, -2, 2, 1],
])

# test1: Kron-reduced matrix at order 2
TEST1_REDUCED_ORDER2 = np.array([
    [-1.9, -0.6, 0.2, 0, 0, 0],
    [-2.1, -2.1, 0.3, 0.05, 0.05, -0.15],
    [0, 0, -3.8, -0.5, -0.7, 0],
    [0, 0, -2.1, -4.1, 0.1, -0.6],
    [0, 0, -2.1, 0.1, -4.1, -0.6],
    [0, 0, 0, -2.2, -2.0, -4.2],
])

TEST1_HTILDE_1 = np.array([[1.0, -1.0]])

# test2 equilibrium (6 digits)
TEST2_X_SEP = np.array([0.136901, 1.108173, 1.102644])
TEST2_Z_SEP = np.array([0.965743, -0.108173])

# test2: dg/dz at the equilibrium (4 decimals)
TEST2_G14 = np.array([
    [-0.3807, 0.1369],
    [0.0, 1.0008],
    [0.0180, 0.0],
])

# test2: (G14 (x) I3) with columns reordered onto dx (x) dz (2-3 digits)
TEST2_G14_REORDERED = np.array([
    [-0.38, 0.137, 0, 0, 0, 0],
    [0, 0, -0.38, 0.137, 0, 0],
    [0, 0, 0, 0, -0.38, 0.137],
    [0, 1.0, 0, 0, 0, 0],
    [0, 0, 0, 1.0, 0, 0],
    [0, 0, 0, 0, 0, 1.0],
    [0.018, 0, 0, 0, 0, 0],
    [0, 0, 0.018, 0, 0, 0],
    [0, 0, 0, 0, 0.018, 0],
])

# third test system: linear eigenvalues and modal data (reference values)
TEST3_EIGENVALUES = np.array([-1.0708, -0.133 - 1.7165j, -0.133 + 1.7165j])
TEST3_FREQUENCY_HZ = 0.2732
TEST3_DAMPING_PERCENT = 7.7266
