"""Fixed-step RK4 for the two-colour ion Hamiltonian (numpy fallback).

Same algorithm and signature as the compiled core.
"""

import numpy as np


class _Deriv:
    def __init__(self, ra, rb, omega_a, omega_b, phase_a, phase_b, amps, dets):
        self.ra = np.ascontiguousarray(ra, dtype=float)
        self.rb_t = np.ascontiguousarray(np.asarray(rb, dtype=float).T)
        self.n1, self.n2 = self.ra.shape[0], self.rb_t.shape[0]
        self.omega = (omega_a, omega_b)
        self.phase = (phase_a, phase_b)
        self.amps = np.asarray(amps, dtype=complex)
        self.dets = np.asarray(dets, dtype=float)
        self.ma = np.arange(self.n1)
        self.mb = np.arange(self.n2)
        self.signs = np.outer((-1.0) ** self.ma, (-1.0) ** self.mb)
        self.x = np.empty((self.n1, 2, 2, self.n2))

    def __call__(self, t, psi):
        """-i H(t) psi."""
        c = np.sum(self.amps * np.exp(-1j * self.dets * t))
        u = np.exp(-1j * self.ma * (self.omega[0] * t + self.phase[0]))
        v = np.exp(-1j * self.mb * (self.omega[1] * t + self.phase[1]))
        ph = np.outer(u, v)
        pg = ph * psi[1]
        pe = self.signs * ph * psi[0]
        x = self.x
        x[:, 0, 0] = pg.real
        x[:, 0, 1] = pg.imag
        x[:, 1, 0] = pe.real
        x[:, 1, 1] = pe.imag
        y = x.reshape(-1, self.n2) @ self.rb_t
        y = (self.ra @ y.reshape(self.n1, -1)).reshape(self.n1, 2, 2, self.n2)
        out = np.empty_like(psi)
        out[0] = -1j * c * ph.conj() * (y[:, 0, 0] + 1j * y[:, 0, 1])
        out[1] = -1j * np.conj(c) * self.signs * ph.conj() * (y[:, 1, 0] + 1j * y[:, 1, 1])
        return out


def rk4_two_colour(psi_in, ra, rb, omega_a, omega_b, phase_a, phase_b, amps, dets, t0, dt, nsteps):
    """Advance ``psi_in`` (shape (2, n1, n2)) by ``nsteps`` RK4 steps; returns a new array."""
    f = _Deriv(ra, rb, omega_a, omega_b, phase_a, phase_b, amps, dets)
    psi = np.array(psi_in, dtype=complex, copy=True)
    if psi.shape != (2, f.n1, f.n2):
        raise ValueError(f"state shape {psi.shape} does not match {(2, f.n1, f.n2)}")
    h2 = 0.5 * dt
    for step in range(nsteps):
        t = t0 + step * dt
        k1 = f(t, psi)
        k2 = f(t + h2, psi + h2 * k1)
        k3 = f(t + h2, psi + h2 * k2)
        k4 = f(t + dt, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def apply_h(psi_in, ra, rb, omega_a, omega_b, phase_a, phase_b, amps, dets, t):
    """``H(t) psi`` for a single state, for checks."""
    f = _Deriv(ra, rb, omega_a, omega_b, phase_a, phase_b, amps, dets)
    return 1j * f(t, np.asarray(psi_in, dtype=complex))
