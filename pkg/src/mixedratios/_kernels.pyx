# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-sample integrand for mixed ratios of characteristic polynomials."""

import numpy as np

cdef inline double _abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def mixed_ratio_batch(const double complex[:, ::1] eigs,
                      const double complex[::1] A,
                      const double complex[::1] B,
                      const double complex[::1] C,
                      const double complex[::1] D,
                      const double complex[::1] E,
                      const double complex[::1] F,
                      bint completed,
                      double guard):
    cdef Py_ssize_t n_samples = eigs.shape[0]
    cdef Py_ssize_t N = eigs.shape[1]
    values = np.empty(n_samples, dtype=np.complex128)
    rejected = np.zeros(n_samples, dtype=np.uint8)
    cdef double complex[::1] out = values
    cdef unsigned char[::1] rej = rejected
    cdef double guard2 = guard * guard
    cdef double half = 0.5 * N
    cdef Py_ssize_t s, j, a
    cdef double complex val, prod, rho, rhoc, den, acc, z
    cdef bint bad
    with nogil:
        for s in range(n_samples):
            val = 1.0
            bad = False
            for a in range(A.shape[0]):
                z = A[a]
                prod = 1.0
                for j in range(N):
                    prod = prod * (1.0 - z * eigs[s, j].conjugate())
                val = val * prod
            for a in range(B.shape[0]):
                z = B[a]
                prod = 1.0
                for j in range(N):
                    prod = prod * (1.0 - z * eigs[s, j])
                val = val * prod
            for a in range(C.shape[0]):
                z = C[a]
                prod = 1.0
                for j in range(N):
                    prod = prod * (1.0 - z * eigs[s, j])
                if _abs2(prod) < guard2:
                    bad = True
                else:
                    val = val / prod
            for a in range(D.shape[0]):
                z = D[a]
                prod = 1.0
                for j in range(N):
                    prod = prod * (1.0 - z * eigs[s, j].conjugate())
                if _abs2(prod) < guard2:
                    bad = True
                else:
                    val = val / prod
            for a in range(E.shape[0]):
                z = E[a]
                acc = 0.0
                for j in range(N):
                    rhoc = eigs[s, j].conjugate()
                    den = 1.0 - z * rhoc
                    if _abs2(den) < guard2:
                        bad = True
                    else:
                        acc = acc - rhoc / den
                if completed:
                    acc = z * acc - half
                val = val * acc
            for a in range(F.shape[0]):
                z = F[a]
                acc = 0.0
                for j in range(N):
                    rho = eigs[s, j]
                    den = 1.0 - z * rho
                    if _abs2(den) < guard2:
                        bad = True
                    else:
                        acc = acc - rho / den
                if completed:
                    acc = z * acc - half
                val = val * acc
            if bad:
                rej[s] = 1
                out[s] = 0.0
            else:
                out[s] = val
    return values, rejected
