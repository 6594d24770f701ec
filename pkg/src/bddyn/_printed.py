"""Literal transcriptions of the long center-manifold coefficient lists.

Everything here follows the published lists term by term, including the
places where they disagree with their own derivation (see ``KNOWN_SLIPS``).
The consistent versions live in :mod:`bddyn.hopf`; the audit compares both.

Indexing: ``f(i, j, k)`` is d^2 f_i/dx_j dx_k, ``p(i, j)`` and ``q(i, j)`` are
entries of the eigenbasis and its inverse, all 1-based.
"""

from __future__ import annotations

import numpy as np

KNOWN_SLIPS = {
    "Omega2": "factor 2 multiplies only the q31 bracket",
    "Omega3": "cross term f_x3x1 uses p31 p12 instead of p32 p12",
    "F1_22": "q13 bracket: f_x3x1 p12 p32 lacks its factor 2",
    "F2_22": "q23 bracket: f_x3x1 p12 p32 lacks its factor 2",
    "F1_122": "q11 bracket: f_x2x2 term uses p22 p33 (should be p22 p23); "
              "q13 bracket: f_x3x1 term uses p12 p13 (should be p12 p33)",
    "q13": "denominator J21 + k1 (should be J22 + k1)",
    "q11": "second denominator (J22^2 + k2)(J22 + k1) (should be (J33^2 + k2)(J22 + k1))",
    "q21": "first denominator uses J22 + k1 (should be J33 + k1) and the overall sign is flipped",
    "q23/q32": "the two entries are interchanged",
}
# the b's and the third-order F's inherit the Omega slips; only the entries above
# are wrong when fed consistent inputs


def _accessors(H, P, Q):
    def f(i, j, k):
        return H[i - 1, j - 1, k - 1]

    def p(i, j):
        return P[i - 1, j - 1]

    def q(i, j):
        return Q[i - 1, j - 1]

    return f, p, q


def omegas(H, P, Q):
    f, p, q = _accessors(H, P, Q)

    def sq(i, col):
        c = col
        return (f(i, 1, 1) * p(1, c) ** 2 + f(i, 2, 2) * p(2, c) ** 2 + f(i, 3, 3) * p(3, c) ** 2
                + 2 * f(i, 2, 3) * p(2, c) * p(3, c) + 2 * f(i, 3, 1) * p(3, c) * p(1, c)
                + 2 * f(i, 1, 2) * p(1, c) * p(2, c))

    def mixed(i):
        return (f(i, 1, 1) * p(1, 1) * p(1, 2) + f(i, 2, 2) * p(2, 1) * p(2, 2) + f(i, 3, 3) * p(3, 1) * p(3, 2)
                + f(i, 2, 3) * (p(2, 1) * p(3, 2) + p(2, 2) * p(3, 1))
                + f(i, 3, 1) * (p(1, 1) * p(3, 2) + p(1, 2) * p(3, 1))
                + f(i, 1, 2) * (p(1, 1) * p(2, 2) + p(1, 2) * p(2, 1)))

    def last(i):
        return (f(i, 1, 1) * p(1, 2) ** 2 + f(i, 2, 2) * p(2, 2) ** 2 + f(i, 3, 3) * p(3, 2) ** 2
                + 2 * f(i, 2, 3) * p(2, 2) * p(3, 2) + 2 * f(i, 3, 1) * p(3, 1) * p(1, 2)
                + 2 * f(i, 1, 2) * p(1, 2) * p(2, 2))

    omega1 = q(3, 1) * sq(1, 1) + q(3, 2) * sq(2, 1) + q(3, 3) * sq(3, 1)
    omega2 = 2 * q(3, 1) * mixed(1) + q(3, 2) * mixed(2) + q(3, 3) * mixed(3)
    omega3 = q(3, 1) * last(1) + q(3, 2) * last(2) + q(3, 3) * last(3)
    return omega1, omega2, omega3


def b_coefficients(k1, k2, omega1, omega2, omega3):
    s = np.sqrt(k2)
    den = k1**3 / 4 + k1 * k2
    b11 = (k2 * (omega1 + omega3) - k1 / 2 * (s * omega2 - k1 * omega1)) / den
    b12 = (k1**2 * omega2 / 4 - k1 * s / 2 * (omega3 - omega1)) / den
    b22 = (k2 * (omega1 + omega3) + k1**2 * omega3 / 2 + k1 * s / 2 * omega2) / den
    return b11, b12, b22


def f_derivatives(H, P, Q, b11, b12, b22):
    """The ten reduced-field derivatives, keyed ``F1_11`` ... ``F2_222``."""
    f, p, q = _accessors(H, P, Q)
    out = {}
    for row, tag in ((1, "F1"), (2, "F2")):
        qa, qb, qc = q(row, 1), q(row, 2), q(row, 3)
        out[f"{tag}_11"] = (
            2 * qa * (f(1, 1, 1) * p(1, 1) ** 2 + f(1, 2, 2) * p(2, 1) ** 2 + f(1, 3, 3) * p(3, 1) ** 2
                      + 2 * f(1, 3, 1) * p(1, 1) * p(3, 1) + 2 * f(1, 1, 2) * p(1, 1) * p(2, 1))
            + 2 * qb * (f(2, 1, 1) * p(1, 1) ** 2 + f(2, 2, 2) * p(2, 1) ** 2 + 2 * f(2, 1, 2) * p(1, 1) * p(2, 1))
            + 2 * qc * (f(3, 1, 1) * p(1, 1) ** 2 + f(3, 3, 3) * p(3, 1) ** 2 + 2 * f(3, 3, 1) * p(1, 1) * p(3, 1)))
        out[f"{tag}_12"] = (
            2 * qa * (f(1, 1, 1) * p(1, 1) * p(1, 2) + f(1, 2, 2) * p(2, 1) * p(2, 2)
                      + f(1, 3, 3) * p(3, 1) * p(3, 2) + f(1, 3, 1) * (p(1, 1) * p(3, 2) + p(1, 2) * p(3, 1))
                      + f(1, 1, 2) * (p(1, 2) * p(2, 1) + p(2, 2) * p(1, 1)))
            + 2 * qb * (f(2, 1, 1) * p(1, 1) * p(1, 2) + f(2, 2, 2) * p(2, 1) * p(2, 2)
                        + f(2, 1, 2) * (p(1, 2) * p(2, 1) + p(2, 2) * p(1, 1)))
            + 2 * qc * (f(3, 1, 1) * p(1, 1) * p(1, 2) + f(3, 3, 3) * p(3, 1) * p(3, 2)
                        + f(3, 3, 1) * (p(1, 1) * p(3, 2) + p(1, 2) * p(3, 1))))
        out[f"{tag}_22"] = (
            2 * qa * (f(1, 1, 1) * p(1, 2) ** 2 + f(1, 2, 2) * p(2, 2) ** 2 + f(1, 3, 3) * p(3, 2) ** 2
                      + 2 * f(1, 3, 1) * p(1, 2) * p(3, 2) + 2 * f(1, 1, 2) * p(1, 2) * p(2, 2))
            + 2 * qb * (f(2, 1, 1) * p(1, 2) ** 2 + f(2, 2, 2) * p(2, 2) ** 2 + 2 * f(2, 1, 2) * p(1, 2) * p(2, 2))
            + 2 * qc * (f(3, 1, 1) * p(1, 2) ** 2 + f(3, 3, 3) * p(3, 2) ** 2 + f(3, 3, 1) * p(1, 2) * p(3, 2)))

    qa, qb, qc = q(1, 1), q(1, 2), q(1, 3)
    out["F1_111"] = (
        6 * qa * b11 * (f(1, 1, 1) * p(1, 1) * p(1, 3) + f(1, 2, 2) * p(2, 1) * p(2, 3)
                        + f(1, 3, 3) * p(3, 1) * p(3, 3) + f(1, 3, 1) * (p(1, 1) * p(3, 3) + p(1, 3) * p(3, 1))
                        + f(1, 1, 2) * (p(1, 1) * p(2, 3) + p(2, 1) * p(1, 3)))
        + 6 * qb * b11 * (f(2, 1, 1) * p(1, 1) * p(1, 3) + f(2, 2, 2) * p(2, 1) * p(2, 3)
                          + f(2, 3, 3) * p(3, 1) * p(3, 3) + f(2, 1, 2) * (p(1, 1) * p(2, 3) + p(1, 3) * p(2, 1)))
        + 6 * qc * b11 * (f(3, 1, 1) * p(1, 1) * p(1, 3) + f(3, 3, 3) * p(3, 1) * p(3, 3)
                          + f(3, 3, 1) * (p(1, 1) * p(3, 3) + p(1, 3) * p(3, 1))))
    out["F1_122"] = (
        2 * qa * (f(1, 1, 1) * (2 * p(1, 2) * p(1, 3) * b12 + p(1, 1) * p(1, 3) * b22)
                  + f(1, 2, 2) * (2 * p(2, 2) * p(3, 3) * b12 + p(2, 1) * p(2, 3) * b22)
                  + f(1, 3, 3) * (2 * p(3, 2) * p(3, 3) * b12 + p(3, 1) * p(3, 3) * b22)
                  + f(1, 3, 1) * (2 * p(1, 3) * p(3, 2) * b12 + p(1, 1) * p(3, 3) * b22
                                  + p(1, 3) * p(3, 1) * b22 + 2 * p(1, 2) * p(3, 3) * b12)
                  + f(1, 1, 2) * (2 * p(1, 2) * p(2, 3) * b12 + p(1, 3) * p(2, 1) * b22
                                  + p(1, 1) * p(2, 3) * b22 + 2 * p(2, 2) * p(1, 3) * b12))
        + 2 * qb * (f(2, 1, 1) * (2 * p(1, 2) * p(1, 3) * b12 + p(1, 1) * p(1, 3) * b22)
                    + f(2, 2, 2) * (2 * p(2, 2) * p(2, 3) * b12 + p(2, 1) * p(2, 3) * b22)
                    + f(2, 1, 2) * (2 * p(1, 2) * p(2, 3) * b12 + p(1, 1) * p(2, 3) * b22
                                    + 2 * p(1, 3) * p(2, 2) * b12 + p(1, 3) * p(2, 1) * b22))
        + 2 * qc * (f(3, 1, 1) * (2 * p(1, 3) * p(1, 2) * b12 + p(1, 1) * p(1, 3) * b22)
                    + f(3, 3, 3) * (2 * p(3, 2) * p(3, 3) * b12 + p(3, 1) * p(3, 3) * b22)
                    + f(3, 3, 1) * (2 * p(3, 2) * p(1, 3) * b12 + p(3, 1) * p(1, 3) * b22
                                    + 2 * p(1, 2) * p(1, 3) * b12 + p(3, 3) * p(1, 1) * b22)))

    qa, qb, qc = q(2, 1), q(2, 2), q(2, 3)
    out["F2_112"] = (
        2 * qa * (f(1, 1, 1) * (2 * p(1, 1) * p(1, 3) * b12 + p(1, 2) * p(1, 3) * b11)
                  + f(1, 2, 2) * (2 * p(2, 1) * p(2, 3) * b12 + p(2, 2) * p(2, 3) * b11)
                  + f(1, 3, 3) * (2 * p(3, 1) * p(3, 3) * b12 + p(3, 2) * p(3, 3) * b11)
                  + f(1, 3, 1) * (2 * p(1, 1) * p(3, 3) * b12 + p(1, 3) * p(3, 2) * b11
                                  + p(1, 2) * p(3, 3) * b11 + 2 * p(1, 3) * p(3, 1) * b12)
                  + f(1, 1, 2) * (2 * p(1, 3) * p(2, 1) * b12 + p(1, 2) * p(2, 3) * b11
                                  + 2 * p(1, 1) * p(2, 3) * b12 + p(2, 2) * p(1, 3) * b11))
        + 2 * qb * (f(2, 1, 1) * (2 * p(1, 1) * p(1, 3) * b12 + p(1, 2) * p(1, 3) * b11)
                    + f(2, 2, 2) * (2 * p(2, 1) * p(2, 3) * b12 + p(2, 2) * p(2, 3) * b11)
                    + f(2, 1, 2) * (2 * p(1, 1) * p(2, 3) * b12 + p(1, 2) * p(2, 3) * b11
                                    + 2 * p(1, 3) * p(2, 1) * b12 + p(1, 3) * p(2, 2) * b11))
        + 2 * qc * (f(3, 1, 1) * (2 * p(1, 1) * p(1, 3) * b12 + p(1, 2) * p(1, 3) * b11)
                    + f(3, 3, 3) * (2 * p(3, 1) * p(3, 3) * b12 + p(3, 2) * p(3, 3) * b11)
                    + f(3, 3, 1) * (2 * p(3, 1) * p(1, 3) * b12 + p(3, 3) * p(1, 2) * b11
                                    + 2 * p(1, 1) * p(3, 3) * b12 + p(3, 2) * p(1, 3) * b11)))
    out["F2_222"] = (
        6 * qa * b22 * (f(1, 1, 1) * p(1, 2) * p(1, 3) + f(1, 2, 2) * p(2, 2) * p(2, 3)
                        + f(1, 3, 3) * p(3, 2) * p(3, 3) + f(1, 3, 1) * (p(1, 2) * p(3, 3) + p(1, 3) * p(3, 2))
                        + f(1, 1, 2) * (p(1, 2) * p(2, 3) + p(1, 3) * p(2, 2)))
        + 6 * qb * b22 * (f(2, 1, 1) * p(1, 2) * p(1, 3) + f(2, 2, 2) * p(2, 2) * p(2, 3)
                          + f(2, 1, 2) * (p(1, 2) * p(2, 3) + p(1, 3) * p(2, 2)))
        + 6 * qc * b22 * (f(3, 1, 1) * p(1, 2) * p(1, 3) + f(3, 3, 3) * p(3, 2) * p(3, 3)
                          + f(3, 3, 1) * (p(1, 2) * p(3, 3) + p(1, 3) * p(3, 2))))
    return out


def stability_quantity(F: dict, k2: float) -> float:
    s = np.sqrt(k2)
    return (F["F1_111"] + F["F2_112"] + F["F1_122"] + F["F2_222"]
            + (F["F1_12"] * (F["F1_11"] + F["F1_22"]) - F["F2_12"] * (F["F2_11"] + F["F2_22"])
               - F["F1_11"] * F["F2_11"] + F["F1_22"] * F["F2_22"]) / s)


def inverse_basis(J, k1, k2):
    """The printed closed-form inverse of the eigenbasis (audit only)."""
    J21, J22, J31, J33 = J[1, 0], J[1, 1], J[2, 0], J[2, 2]
    s = np.sqrt(k2)
    P = basis(J, k1, k2)
    det = np.linalg.det(P)
    Q = np.empty((3, 3))
    Q[0, 0] = J21 * J22 * J31 / ((J22**2 + k2) * (J33 + k1)) - J21 * J33 * J31 / ((J22**2 + k2) * (J22 + k1))
    Q[0, 1] = J31 / (J33 + k1) - J31 * J33 / (J33**2 + k2)
    Q[0, 2] = -J21 / (J21 + k1) + J21 * J22 / (J22**2 + k2)
    Q[1, 0] = (J21 * s * J31 / ((J22**2 + k2) * (J22 + k1))
               - J21 * s * J31 / ((J33**2 + k2) * (J22 + k1)))
    Q[1, 1] = s * J31 / (J33**2 + k2)
    Q[1, 2] = -s * J31 / (J33**2 + k2)
    Q[2, 0] = (J21 * s * J31 * J33 / ((J22**2 + k2) * (J33**2 + k2))
               - J21 * s * J31 * J22 / ((J33**2 + k2) * (J22**2 + k2)))
    Q[2, 1] = -s * J21 / (J22**2 + k2)
    Q[2, 2] = s * J21 / (J22**2 + k2)
    return Q / det


def basis(J, k1, k2):
    """Columns: imaginary part and real part of the eigenvector for +i sqrt(k2), then the -k1 eigenvector."""
    J21, J22, J31, J33 = J[1, 0], J[1, 1], J[2, 0], J[2, 2]
    s = np.sqrt(k2)
    return np.array([
        [0.0, 1.0, 1.0],
        [-J21 * s / (J22**2 + k2), -J21 * J22 / (J22**2 + k2), -J21 / (J22 + k1)],
        [-J31 * s / (J33**2 + k2), -J31 * J33 / (J33**2 + k2), -J31 / (J33 + k1)],
    ])
