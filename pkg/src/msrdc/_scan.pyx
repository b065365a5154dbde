# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled table scan; semantics and check counters mirror _scan_py exactly."""

ctypedef unsigned long long u64
ctypedef long long i64

ctypedef fused cost_t:
    i64
    double

NAME = "compiled"


def scan_single(u64[:, ::1] crem, unsigned int[:, ::1] need, i64[:, ::1] req, int kplus1,
                cost_t[::1] cost, u64[::1] cov, i64[:, ::1] exc, int[::1] solid,
                i64[::1] offsets, u64[::1] union_cov, i64[:, ::1] max_exc,
                cost_t[::1] cost_out, int[::1] sol_out):
    cdef Py_ssize_t ndirs = crem.shape[0], cgrid = crem.shape[1]
    cdef Py_ssize_t d, cf, key = 0
    cdef Py_ssize_t kp, idx, lo, hi, found, pos
    cdef u64 cr
    cdef unsigned int nb, bits
    cdef i64 checks = 0
    cdef bint ok, hopeless
    for d in range(ndirs):
        for cf in range(cgrid):
            cr = crem[d, cf]
            nb = need[d, cf]
            for kp in range(kplus1):
                if cr & ~union_cov[kp]:
                    key += 1
                    continue
                bits = nb
                pos = 0
                hopeless = False
                while bits:
                    if (bits & 1) and max_exc[kp, pos] < req[pos, cf]:
                        hopeless = True
                        break
                    bits >>= 1
                    pos += 1
                if hopeless:
                    key += 1
                    continue
                found = -1
                lo = offsets[kp]
                hi = offsets[kp + 1]
                for idx in range(lo, hi):
                    checks += 1
                    if cr & ~cov[idx]:
                        continue
                    bits = nb
                    pos = 0
                    ok = True
                    while bits:
                        if (bits & 1) and exc[idx, pos] < req[pos, cf]:
                            ok = False
                            break
                        bits >>= 1
                        pos += 1
                    if ok:
                        found = idx
                        break
                if found >= 0:
                    cost_out[key] = cost[found]
                    sol_out[key] = solid[found]
                key += 1
    return checks
