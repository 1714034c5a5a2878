"""Pure numpy fallback for the compiled integrand kernel."""

import numpy as np


def mixed_ratio_batch(eigs, A, B, C, D, E, F, completed, guard):
    eigs = np.asarray(eigs, dtype=np.complex128)
    conj = eigs.conj()
    N = eigs.shape[1]
    values = np.ones(eigs.shape[0], dtype=np.complex128)
    bad = np.zeros(eigs.shape[0], dtype=bool)
    for z in A:
        values *= np.prod(1 - z * conj, axis=1)
    for z in B:
        values *= np.prod(1 - z * eigs, axis=1)
    for zs, base in ((C, eigs), (D, conj)):
        for z in zs:
            den = np.prod(1 - z * base, axis=1)
            small = np.abs(den) < guard
            bad |= small
            values /= np.where(small, 1, den)
    for zs, base in ((E, conj), (F, eigs)):
        for z in zs:
            den = 1 - z * base
            small = np.abs(den) < guard
            bad |= small.any(axis=1)
            acc = np.sum(np.where(small, 0, -base / np.where(small, 1, den)), axis=1)
            if completed:
                acc = z * acc - 0.5 * N
            values *= acc
    values[bad] = 0
    return values, bad.astype(np.uint8)
