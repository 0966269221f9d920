"""Random matrices over R, C and H for the property tests."""

import numpy as np

from matbeta.ground_fields import GroundField
from matbeta.matk import MatK

FIELDS = (GroundField.REAL, GroundField.COMPLEX, GroundField.QUATERNION)


def rand_mat(field, n, m, rng, scale=1.0):
    if field is GroundField.REAL:
        return MatK(field, scale * rng.standard_normal((n, m)))
    if field is GroundField.COMPLEX:
        return MatK(field, scale * (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))))
    return MatK.from_components(scale * rng.standard_normal((n, m, 4)))


def rand_pd(field, n, rng, shift=0.3):
    a = rand_mat(field, n, n, rng)
    return a @ a.adjoint() + MatK.identity(n, field) * shift


def rand_antiherm(field, n, rng, scale=1.0):
    a = rand_mat(field, n, n, rng, scale)
    return (a - a.adjoint()) * 0.5


def rand_dissipative(field, n, rng):
    return rand_pd(field, n, rng) + rand_antiherm(field, n, rng)


def block(blocks, field):
    return MatK(field, np.block([[b.data for b in row] for row in blocks]))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
