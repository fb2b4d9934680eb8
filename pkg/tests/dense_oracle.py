"""Brute-force Fock-space construction of the three-mode Hamiltonian.

Used only as an independent reference: operators are built from truncated
ladder matrices with Kronecker products, then the (N, J) block is cut out by
occupation numbers. Nothing here shares code with the package.
"""
import numpy as np

CUT_A, CUT_B, CUT_C = 10, 10, 5


def _ladder(cut):
    return np.diag(np.sqrt(np.arange(1, cut + 1, dtype=float)), 1)


def _kron3(x, y, z):
    return np.kron(np.kron(x, y), z)


def fock_operators(cut_a=CUT_A, cut_b=CUT_B, cut_c=CUT_C):
    ia, ib, ic = np.eye(cut_a + 1), np.eye(cut_b + 1), np.eye(cut_c + 1)
    a = _kron3(_ladder(cut_a), ib, ic)
    b = _kron3(ia, _ladder(cut_b), ic)
    c = _kron3(ia, ib, _ladder(cut_c))
    occ = np.array(
        [(na, nb, nc) for na in range(cut_a + 1) for nb in range(cut_b + 1) for nc in range(cut_c + 1)]
    )
    return a, b, c, occ


_OPS = None


def _ops():
    global _OPS
    if _OPS is None:
        _OPS = fock_operators()
    return _OPS


def dense_hamiltonian(p):
    """p: mapping with u_aa ... mu_c and omega."""
    a, b, c, occ = _ops()
    na, nb, nc = a.T @ a, b.T @ b, c.T @ c
    h = (
        p["u_aa"] * na @ na
        + p["u_bb"] * nb @ nb
        + p["u_cc"] * nc @ nc
        + p["u_ab"] * na @ nb
        + p["u_ac"] * na @ nc
        + p["u_bc"] * nb @ nc
        + p["mu_a"] * na
        + p["mu_b"] * nb
        + p["mu_c"] * nc
    )
    hop = a.T @ b.T @ c
    return h + p["omega"] * (hop + hop.T)


def number_operators():
    a, b, c, _ = _ops()
    na, nb, nc = a.T @ a, b.T @ b, c.T @ c
    return na + nb + 2 * nc, na - nb


def block(h, n_total, j_imbalance):
    """Rows/columns of h whose Fock state has the given N and J."""
    _, _, _, occ = _ops()
    mask = (occ[:, 0] + occ[:, 1] + 2 * occ[:, 2] == n_total) & (occ[:, 0] - occ[:, 1] == j_imbalance)
    idx = np.flatnonzero(mask)
    return h[np.ix_(idx, idx)], occ[idx]


def hopping_element(n_total, omega, j):
    """<j | Omega (a+ b+ c + h.c.) | j-1> between normalised Fock states."""
    p = dict.fromkeys(("u_aa", "u_bb", "u_cc", "u_ab", "u_ac", "u_bc", "mu_a", "mu_b", "mu_c"), 0.0)
    p["omega"] = omega
    sub, occ = block(dense_hamiltonian(p), n_total, 0)
    # order by molecule number so index equals j
    order = np.argsort(occ[:, 2])
    sub = sub[np.ix_(order, order)]
    return sub[j - 1, j]
