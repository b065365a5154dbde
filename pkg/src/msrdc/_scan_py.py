"""Pure-Python table scan: the fallback backend and the reference semantics.

The compiled twin in _scan.pyx mirrors this loop exactly; both must produce
byte-identical tables and check counters.
"""

NAME = "pure"


def scan_single(crem, need, req, kplus1, cost, cov, exc, solid, offsets,
                union_cov, max_exc, cost_out, sol_out):
    """Fill entries from one (cost, solution)-sorted candidate list per budget.

    For every key the first feasible candidate is the entry.  A key whose
    remaining clients are not even covered by the union of all candidate
    covers, or whose excess requirement beats every candidate, is NIL without
    scanning.  Returns the number of candidate feasibility evaluations.
    """
    checks = 0
    ndirs, cgrid = crem.shape
    off = offsets.tolist()
    cov_l = [int(x) for x in cov]
    cost_l = cost.tolist()
    solid_l = solid.tolist()
    exc_l = exc.tolist()
    req_l = req.tolist()
    ucov_l = [int(x) for x in union_cov]
    mexc_l = max_exc.tolist()
    key = 0
    for d in range(ndirs):
        crem_l = [int(x) for x in crem[d]]
        need_l = need[d].tolist()
        for cf in range(cgrid):
            cr = crem_l[cf]
            nb = need_l[cf]
            for kp in range(kplus1):
                if cr & ~ucov_l[kp]:
                    key += 1
                    continue
                bits = nb
                pos = 0
                hopeless = False
                mrow = mexc_l[kp]
                while bits:
                    if bits & 1 and mrow[pos] < req_l[pos][cf]:
                        hopeless = True
                        break
                    bits >>= 1
                    pos += 1
                if hopeless:
                    key += 1
                    continue
                found = -1
                for idx in range(off[kp], off[kp + 1]):
                    checks += 1
                    if cr & ~cov_l[idx]:
                        continue
                    bits = nb
                    pos = 0
                    ok = True
                    row = exc_l[idx]
                    while bits:
                        if bits & 1 and row[pos] < req_l[pos][cf]:
                            ok = False
                            break
                        bits >>= 1
                        pos += 1
                    if ok:
                        found = idx
                        break
                if found >= 0:
                    cost_out[key] = cost_l[found]
                    sol_out[key] = solid_l[found]
                key += 1
    return checks
