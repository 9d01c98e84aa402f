# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fixed-step RK4 for the two-colour ion Hamiltonian (compiled core).

The state is ``psi[q, m, n]`` with qubit index 0 = e, 1 = g. Each mode's
displacement factor is ``D(eta e^{i theta}) = Q R Q^dag`` with ``R = D(eta)``
real and ``Q = diag(e^{i n theta})``, so one derivative costs two real
matrix products on a stacked (g, e) x (re, im) block. Complex numbers are
kept as separate real and imaginary planes so the element loops vectorise.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef struct Work:
    int n1
    int n2
    double *ra
    double *rb
    double *x      # (n1, 4, n2) stacked block before the products
    double *u      # after the mode-b product
    double *v      # after the mode-a product
    double *ph     # (2, n1, n2) phase product u_m v_n, re and im planes
    double *sgn    # (n2,) sign (-1)^n
    double *vb     # (2, n2)
    int ntones
    double *amps   # (ntones, 2)
    double *dets
    double omega_a
    double omega_b
    double phase_a
    double phase_b


cdef void _deriv(Work *w, double t, const double *psi, double *out) noexcept nogil:
    """out = -i H(t) psi on planar arrays (e_re, e_im, g_re, g_im), each (n1, n2)."""
    cdef int n1 = w.n1, n2 = w.n2, m, n, j, base, row
    cdef int blk = n1 * n2
    cdef int ld = 4 * n2
    cdef int four_n1 = 4 * n1
    cdef double ta = w.omega_a * t + w.phase_a
    cdef double tb = w.omega_b * t + w.phase_b
    cdef double cr = 0.0, ci = 0.0, cs, sn, ur, ui, pr, pi_, ar, ai, br, bi, zr, zi, sa
    cdef double one = 1.0, zero = 0.0
    cdef char nch = b'N'
    cdef char tch = b'T'
    cdef const double *er = psi
    cdef const double *ei = psi + blk
    cdef const double *gr = psi + 2 * blk
    cdef const double *gi = psi + 3 * blk
    cdef double *oer = out
    cdef double *oei = out + blk
    cdef double *ogr = out + 2 * blk
    cdef double *ogi = out + 3 * blk
    cdef double *phr = w.ph
    cdef double *phi = w.ph + blk
    cdef double *vr = w.vb
    cdef double *vi = w.vb + n2
    cdef double *sb = w.sgn
    cdef double *x = w.x
    cdef double *v = w.v

    for j in range(w.ntones):
        # c(t) = sum_j amp_j e^{-i det_j t}
        cs = cos(w.dets[j] * t)
        sn = sin(w.dets[j] * t)
        cr += w.amps[2 * j] * cs + w.amps[2 * j + 1] * sn
        ci += w.amps[2 * j + 1] * cs - w.amps[2 * j] * sn
    for n in range(n2):
        vr[n] = cos(n * tb)
        vi[n] = -sin(n * tb)

    # x[m] = [g_re, g_im, e_re, e_im] rows, rotated by conj(Q); e also sign-twisted
    for m in range(n1):
        ur = cos(m * ta)
        ui = -sin(m * ta)
        sa = 1.0 if m % 2 == 0 else -1.0
        base = m * n2
        row = m * ld
        for n in range(n2):
            pr = ur * vr[n] - ui * vi[n]
            pi_ = ur * vi[n] + ui * vr[n]
            phr[base + n] = pr
            phi[base + n] = pi_
            x[row + n] = pr * gr[base + n] - pi_ * gi[base + n]
            x[row + n2 + n] = pr * gi[base + n] + pi_ * gr[base + n]
            x[row + 2 * n2 + n] = sa * sb[n] * (pr * er[base + n] - pi_ * ei[base + n])
            x[row + 3 * n2 + n] = sa * sb[n] * (pr * ei[base + n] + pi_ * er[base + n])

    # u = x.reshape(4 n1, n2) @ rb.T ; v = ra @ u.reshape(n1, 4 n2)  (row-major views)
    dgemm(&tch, &nch, &n2, &four_n1, &n2, &one, w.rb, &n2, w.x, &n2, &zero, w.u, &n2)
    dgemm(&nch, &nch, &ld, &n1, &n1, &one, w.u, &ld, w.ra, &n1, &zero, w.v, &ld)

    for m in range(n1):
        sa = 1.0 if m % 2 == 0 else -1.0
        base = m * n2
        row = m * ld
        for n in range(n2):
            # z = conj(u_m v_n) * y
            pr = phr[base + n]
            pi_ = phi[base + n]
            br = v[row + n]
            bi = v[row + n2 + n]
            zr = pr * br + pi_ * bi
            zi = pr * bi - pi_ * br
            # out_e = -i c z
            oer[base + n] = cr * zi + ci * zr
            oei[base + n] = -(cr * zr - ci * zi)
            br = sa * sb[n] * v[row + 2 * n2 + n]
            bi = sa * sb[n] * v[row + 3 * n2 + n]
            zr = pr * br + pi_ * bi
            zi = pr * bi - pi_ * br
            # out_g = -i conj(c) z
            ogr[base + n] = cr * zi - ci * zr
            ogi[base + n] = -(cr * zr + ci * zi)


cdef class _Kernel:
    cdef Work w
    cdef object _keep

    def __cinit__(self):
        self.w.x = NULL

    def __init__(self, ra, rb, double omega_a, double omega_b, double phase_a, double phase_b, amps, dets):
        cdef cnp.ndarray[double, ndim=2, mode="c"] ra_c = np.ascontiguousarray(ra, dtype=np.float64)
        cdef cnp.ndarray[double, ndim=2, mode="c"] rb_c = np.ascontiguousarray(rb, dtype=np.float64)
        cdef cnp.ndarray[double, ndim=1, mode="c"] amps_c = np.ascontiguousarray(
            np.asarray(amps, dtype=np.complex128)).view(np.float64)
        cdef cnp.ndarray[double, ndim=1, mode="c"] dets_c = np.ascontiguousarray(dets, dtype=np.float64)
        n1, n2 = ra_c.shape[0], rb_c.shape[0]
        if ra_c.shape[1] != n1 or rb_c.shape[1] != n2:
            raise ValueError("displacement blocks must be square")
        if amps_c.shape[0] != 2 * dets_c.shape[0]:
            raise ValueError("amplitudes and detunings differ in length")
        n = np.arange(n2)
        cdef cnp.ndarray[double, ndim=1, mode="c"] sgn = np.ascontiguousarray((-1.0) ** n)
        scratch = [np.zeros(4 * n1 * n2) for _ in range(3)]
        cdef cnp.ndarray[double, ndim=1, mode="c"] x = scratch[0]
        cdef cnp.ndarray[double, ndim=1, mode="c"] u = scratch[1]
        cdef cnp.ndarray[double, ndim=1, mode="c"] v = scratch[2]
        cdef cnp.ndarray[double, ndim=1, mode="c"] ph = np.zeros(2 * n1 * n2)
        cdef cnp.ndarray[double, ndim=1, mode="c"] vb = np.zeros(2 * n2)
        # numpy owns every buffer; keep references alive for the raw pointers
        self._keep = (ra_c, rb_c, amps_c, dets_c, sgn, x, u, v, ph, vb)
        self.w.n1 = n1
        self.w.n2 = n2
        self.w.ra = &ra_c[0, 0]
        self.w.rb = &rb_c[0, 0]
        self.w.x = &x[0]
        self.w.u = &u[0]
        self.w.v = &v[0]
        self.w.ph = &ph[0]
        self.w.sgn = &sgn[0]
        self.w.vb = &vb[0]
        self.w.ntones = dets_c.shape[0]
        self.w.amps = &amps_c[0] if amps_c.shape[0] else NULL
        self.w.dets = &dets_c[0] if dets_c.shape[0] else NULL
        self.w.omega_a = omega_a
        self.w.omega_b = omega_b
        self.w.phase_a = phase_a
        self.w.phase_b = phase_b

    def _planar(self, psi_in):
        shape = (2, self.w.n1, self.w.n2)
        arr = np.asarray(psi_in, dtype=np.complex128)
        if arr.shape != shape:
            raise ValueError(f"state shape {arr.shape} does not match {shape}")
        # (e_re, e_im, g_re, g_im)
        return np.ascontiguousarray(np.stack([arr[0].real, arr[0].imag, arr[1].real, arr[1].imag]).reshape(-1))

    def _complex(self, planes):
        q = planes.reshape(4, self.w.n1, self.w.n2)
        return np.stack([q[0] + 1j * q[1], q[2] + 1j * q[3]])

    def rk4(self, psi_in, double t0, double dt, long nsteps):
        cdef cnp.ndarray[double, ndim=1, mode="c"] y = self._planar(psi_in)
        cdef int size = y.shape[0]
        cdef cnp.ndarray[double, ndim=2, mode="c"] ks = np.zeros((5, size))
        cdef double *p = &y[0]
        cdef double *k1 = &ks[0, 0]
        cdef double *k2 = &ks[1, 0]
        cdef double *k3 = &ks[2, 0]
        cdef double *k4 = &ks[3, 0]
        cdef double *tmp = &ks[4, 0]
        cdef long step
        cdef int i
        cdef double t, h2 = 0.5 * dt, h6 = dt / 6.0
        with nogil:
            for step in range(nsteps):
                t = t0 + step * dt
                _deriv(&self.w, t, p, k1)
                for i in range(size):
                    tmp[i] = p[i] + h2 * k1[i]
                _deriv(&self.w, t + h2, tmp, k2)
                for i in range(size):
                    tmp[i] = p[i] + h2 * k2[i]
                _deriv(&self.w, t + h2, tmp, k3)
                for i in range(size):
                    tmp[i] = p[i] + dt * k3[i]
                _deriv(&self.w, t + dt, tmp, k4)
                for i in range(size):
                    p[i] = p[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        return self._complex(y)

    def apply(self, psi_in, double t):
        cdef cnp.ndarray[double, ndim=1, mode="c"] y = self._planar(psi_in)
        cdef cnp.ndarray[double, ndim=1, mode="c"] o = np.empty_like(y)
        _deriv(&self.w, t, &y[0], &o[0])
        return 1j * self._complex(o)


def rk4_two_colour(psi_in, ra, rb, double omega_a, double omega_b, double phase_a, double phase_b,
                   amps, dets, double t0, double dt, long nsteps):
    """Advance ``psi_in`` (shape (2, n1, n2)) by ``nsteps`` RK4 steps; returns a new array."""
    return _Kernel(ra, rb, omega_a, omega_b, phase_a, phase_b, amps, dets).rk4(psi_in, t0, dt, nsteps)


def apply_h(psi_in, ra, rb, double omega_a, double omega_b, double phase_a, double phase_b,
            amps, dets, double t):
    """``H(t) psi`` for a single state, for checks."""
    return _Kernel(ra, rb, omega_a, omega_b, phase_a, phase_b, amps, dets).apply(psi_in, t)
