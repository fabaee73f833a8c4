# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled Lindblad right-hand side and fused RK4 for spin chains.

The Hamiltonian is ``sum_t c_t X^{mask_t} + diag(hdiag)``, where ``X^mask``
flips the bits in ``mask``. Dissipators are local dephasing ``sigma^z`` at
rate ``gz`` and the ladder pair ``sigma^+`` (``gp``) and ``sigma^-`` (``gm``)
on every site. Bit value 0 is ``sigma^z = +1``.

``rk4_steps`` only touches the upper triangle and, when ``block_diag`` is
set, only entries whose row and column share bit parity. All terms above
map that set onto itself, so the skipped entries are never read.
"""
import numpy as np

ctypedef double complex cplx

cdef extern from *:
    int __builtin_popcountl(unsigned long) nogil


cdef inline int _pc(long x) noexcept nogil:
    return __builtin_popcountl(<unsigned long>x)


cdef inline void _entry(const double* rho, Py_ssize_t dim, long a, long b,
                        const long* masks, const double* coeffs, Py_ssize_t n_masks,
                        const double* hdiag, int n_sites,
                        double gz, double gp, double gm,
                        double* out_re, double* out_im) noexcept nogil:
    # rho is interleaved (re, im); all products are real * complex
    cdef Py_ssize_t t, i0, i1
    cdef long m, bit
    cdef int pa, pb
    cdef Py_ssize_t ab = 2 * (a * dim + b)
    cdef double r_re = rho[ab], r_im = rho[ab + 1]
    cdef double dh = hdiag[a] - hdiag[b]
    cdef double acc_re = dh * r_re, acc_im = dh * r_im
    for t in range(n_masks):
        m = masks[t]
        i0 = 2 * ((a ^ m) * dim + b)
        i1 = 2 * (a * dim + (b ^ m))
        acc_re = acc_re + coeffs[t] * (rho[i0] - rho[i1])
        acc_im = acc_im + coeffs[t] * (rho[i0 + 1] - rho[i1 + 1])
    pa = _pc(a)
    pb = _pc(b)
    cdef double d = -2.0 * gz * _pc(a ^ b) - 0.5 * (gp * (pa + pb) + gm * (2 * n_sites - pa - pb))
    # -i * acc = (acc_im, -acc_re)
    cdef double v_re = acc_im + d * r_re
    cdef double v_im = -acc_re + d * r_im
    cdef long z, o
    if gp != 0.0:
        # sites where both row and column are in |0>
        z = ~(a | b) & ((1L << n_sites) - 1)
        while z:
            bit = z & -z
            z ^= bit
            i0 = 2 * ((a | bit) * dim + (b | bit))
            v_re = v_re + gp * rho[i0]
            v_im = v_im + gp * rho[i0 + 1]
    if gm != 0.0:
        o = a & b
        while o:
            bit = o & -o
            o ^= bit
            i0 = 2 * ((a ^ bit) * dim + (b ^ bit))
            v_re = v_re + gm * rho[i0]
            v_im = v_im + gm * rho[i0 + 1]
    out_re[0] = v_re
    out_im[0] = v_im


def _padded(masks, coeffs):
    # keep one harmless entry so that taking the address of element 0 is valid
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    n = len(masks)
    if n == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(1), 0
    return masks, coeffs, n


def lindblad_rhs(const cplx[:, ::1] rho, masks_in, coeffs_in,
                 const double[::1] hdiag, int n_sites, double gz, double gp, double gm):
    """Full right-hand side ``d rho / dt`` (no symmetry assumed)."""
    masks_arr, coeffs_arr, n_masks = _padded(masks_in, coeffs_in)
    cdef const long[::1] masks = masks_arr
    cdef const double[::1] coeffs = coeffs_arr
    cdef Py_ssize_t nm = n_masks
    cdef Py_ssize_t dim = rho.shape[0], a, b
    out_arr = np.empty((dim, dim), dtype=np.complex128)
    cdef double[:, ::1] out = out_arr.view(np.float64)
    cdef const double* src = <const double*> &rho[0, 0]
    with nogil:
        for a in range(dim):
            for b in range(dim):
                _entry(src, dim, a, b, &masks[0], &coeffs[0], nm, &hdiag[0], n_sites, gz, gp, gm,
                       &out[a, 2 * b], &out[a, 2 * b + 1])
    return out_arr


cdef void _mirror(double* x, Py_ssize_t dim, const long[:, ::1] cols, const long[::1] cls,
                  const long[::1] pos) noexcept nogil:
    cdef Py_ssize_t a, j, ncol = cols.shape[1], src, dst
    cdef long b
    for a in range(dim):
        for j in range(pos[a] + 1, ncol):
            b = cols[cls[a], j]
            src = 2 * (a * dim + b)
            dst = 2 * (b * dim + a)
            x[dst] = x[src]
            x[dst + 1] = -x[src + 1]


def _active_set(Py_ssize_t dim, bint block_diag):
    """Column lists per parity class plus each row's class and position in it."""
    idx = np.arange(dim, dtype=np.int64)
    if not block_diag:
        return idx[None, :].copy(), np.zeros(dim, dtype=np.int64), idx.copy()
    par = np.array([bin(i).count("1") & 1 for i in range(dim)], dtype=np.int64)
    cols = np.stack([idx[par == 0], idx[par == 1]])
    pos = np.empty(dim, dtype=np.int64)
    for p in (0, 1):
        pos[cols[p]] = np.arange(cols.shape[1])
    return cols, par, pos


# stage kinds of one RK4 step
cdef enum:
    STAGE_FIRST = 0
    STAGE_MIDDLE = 1
    STAGE_THIRD = 2
    STAGE_LAST = 3


cdef void _stage(int kind, const double* src, double* R, double* A, double* T, Py_ssize_t dim,
                 const long[:, ::1] cols, const long[::1] cls, const long[::1] pos,
                 const long* M, const double* C, Py_ssize_t nm, const double* HD, int n_sites,
                 double gz, double gp, double gm, double dt) noexcept nogil:
    """Evaluate the RHS on ``src`` over the active set and update the RK4 buffers."""
    cdef Py_ssize_t a, j, ix, ncol = cols.shape[1]
    cdef long b, c
    cdef double k_re, k_im
    cdef double h2 = 0.5 * dt, h3 = dt / 3.0, h6 = dt / 6.0
    for a in range(dim):
        c = cls[a]
        for j in range(pos[a], ncol):
            b = cols[c, j]
            ix = 2 * (a * dim + b)
            _entry(src, dim, a, b, M, C, nm, HD, n_sites, gz, gp, gm, &k_re, &k_im)
            if kind == STAGE_FIRST:
                A[ix] = R[ix] + h6 * k_re
                A[ix + 1] = R[ix + 1] + h6 * k_im
                T[ix] = R[ix] + h2 * k_re
                T[ix + 1] = R[ix + 1] + h2 * k_im
            elif kind == STAGE_MIDDLE:
                A[ix] += h3 * k_re
                A[ix + 1] += h3 * k_im
                T[ix] = R[ix] + h2 * k_re
                T[ix + 1] = R[ix + 1] + h2 * k_im
            elif kind == STAGE_THIRD:
                A[ix] += h3 * k_re
                A[ix + 1] += h3 * k_im
                T[ix] = R[ix] + dt * k_re
                T[ix + 1] = R[ix + 1] + dt * k_im
            else:
                R[ix] = A[ix] + h6 * k_re
                R[ix + 1] = A[ix + 1] + h6 * k_im


def rk4_steps(rho_in, long n_steps, double dt, masks_in, coeffs_in,
              const double[::1] hdiag, int n_sites, double gz, double gp, double gm,
              bint block_diag=False):
    """``n_steps`` classic RK4 steps of size ``dt`` on a Hermitian ``rho``.

    Returns a new array; the input is not modified.
    """
    masks_arr, coeffs_arr, n_masks = _padded(masks_in, coeffs_in)
    cdef const long[::1] masks = masks_arr
    cdef const double[::1] coeffs = coeffs_arr
    cdef Py_ssize_t nm = n_masks
    rho_arr = np.array(rho_in, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t dim = rho_arr.shape[0]
    cols_arr, cls_arr, pos_arr = _active_set(dim, block_diag)
    cdef const long[:, ::1] cols = cols_arr
    cdef const long[::1] cls = cls_arr
    cdef const long[::1] pos = pos_arr
    cdef cplx[:, ::1] rho = rho_arr
    acc_arr = np.zeros_like(rho_arr)
    t1_arr = np.zeros_like(rho_arr)
    t2_arr = np.zeros_like(rho_arr)
    cdef cplx[:, ::1] acc = acc_arr
    cdef cplx[:, ::1] t1 = t1_arr
    cdef cplx[:, ::1] t2 = t2_arr
    cdef double* R = <double*> &rho[0, 0]
    cdef double* A = <double*> &acc[0, 0]
    cdef double* T1 = <double*> &t1[0, 0]
    cdef double* T2 = <double*> &t2[0, 0]
    cdef const long* M = &masks[0]
    cdef const double* C = &coeffs[0]
    cdef const double* HD = &hdiag[0]
    cdef long step
    with nogil:
        for step in range(n_steps):
            _stage(STAGE_FIRST, R, R, A, T1, dim, cols, cls, pos, M, C, nm, HD, n_sites, gz, gp, gm, dt)
            _mirror(T1, dim, cols, cls, pos)
            _stage(STAGE_MIDDLE, T1, R, A, T2, dim, cols, cls, pos, M, C, nm, HD, n_sites, gz, gp, gm, dt)
            _mirror(T2, dim, cols, cls, pos)
            _stage(STAGE_THIRD, T2, R, A, T1, dim, cols, cls, pos, M, C, nm, HD, n_sites, gz, gp, gm, dt)
            _mirror(T1, dim, cols, cls, pos)
            _stage(STAGE_LAST, T1, R, A, T1, dim, cols, cls, pos, M, C, nm, HD, n_sites, gz, gp, gm, dt)
            _mirror(R, dim, cols, cls, pos)
    return rho_arr
