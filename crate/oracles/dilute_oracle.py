"""Independent reference values for the dilute crate's tests.

Evaluates the closed-form scalars with mpmath at 40 digits and brute-forces
the all-defect row of width 4 over every tile assignment. Output is frozen
into crates/dilute/tests/data/oracle.json; rerun only if a definition changes.
"""

import itertools
import json
import sys
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40

OUT = Path(__file__).resolve().parent.parent / "crates/dilute/tests/data/oracle.json"


def c(z):
    z = mp.mpc(z)
    return [float(z.real), float(z.imag)]


def weights(u, lam):
    s2, s3 = mp.sin(2 * lam), mp.sin(3 * lam)
    r1 = 1 + mp.sin(u) * mp.sin(3 * lam - u) / (s2 * s3)
    r23 = mp.sin(3 * lam - u) / s3
    r45 = mp.sin(u) / s3
    r67 = mp.sin(u) * mp.sin(3 * lam - u) / (s2 * s3)
    r8 = mp.sin(2 * lam - u) * mp.sin(3 * lam - u) / (s2 * s3)
    r9 = -mp.sin(u) * mp.sin(lam - u) / (s2 * s3)
    return [r1, r23, r23, r45, r45, r67, r67, r8, r9]


def trinomial_table(nmax):
    # coefficient of x^d in (x + 1 + 1/x)^N by repeated convolution
    table = {}
    poly = {0: 1}
    for n in range(1, nmax + 1):
        nxt = {}
        for k, v in poly.items():
            for s in (-1, 0, 1):
                nxt[k + s] = nxt.get(k + s, 0) + v
        poly = nxt
        table[n] = [poly.get(d, 0) for d in range(n + 1)]
    return table


# tiles in the order ρ1..ρ9; strands over face sides L, B, R, T
L, B, R, T = range(4)
TILES = [
    [],
    [(L, T)],
    [(B, R)],
    [(L, B)],
    [(T, R)],
    [(L, R)],
    [(B, T)],
    [(L, T), (B, R)],
    [(L, B), (T, R)],
]


def all_defect_row(n, u, lam, xi, omega):
    """Sum over tile rows mapping every bottom defect to a top defect.

    A defect walked downward that crosses the seam leftward picks up ω,
    rightward ω⁻¹; rows closing a loop or leaving a side unmatched are
    dropped because no loop can survive in the all-defect sector.
    """
    total = mp.mpc(0)
    w = [weights(u - x, lam) for x in xi]
    for row in itertools.product(range(9), repeat=n):
        occ = [{s for p in TILES[t] for s in p} for t in row]
        if any((R in occ[j]) != (L in occ[(j + 1) % n]) for j in range(n)):
            continue
        if not all(B in o and T in o for o in occ):
            continue
        winding = 0
        ok = True
        for start in range(n):
            # walk down from top of column `start`
            j, side = start, T
            while True:
                partner = next(b if a == side else a for a, b in TILES[row[j]] if side in (a, b))
                if partner == B:
                    break
                if partner == L:
                    if j == 0:
                        winding += 1
                    j, side = (j - 1) % n, R
                elif partner == R:
                    if j == n - 1:
                        winding -= 1
                    j, side = (j + 1) % n, L
                else:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        weight = mp.mpc(1)
        for j, t in enumerate(row):
            weight *= w[j][t]
        total += weight * omega ** winding
    return total


def main():
    lam = mp.mpf("0.55")
    out = {}

    out["trinomial"] = {str(n): v for n, v in trinomial_table(8).items()}

    norm = mp.sqrt(mp.sin(2 * lam) * mp.sin(3 * lam))
    u = mp.mpf("0.3")
    out["f0_u0.3_N2"] = c(mp.sin(u - 0) / norm * mp.sin(u - mp.mpf("0.1")) / norm)

    x = mp.expj(mp.mpf("0.37"))
    br = lambda k: x**k - x ** (-k)
    out["epsilon1_m2_lambda0.37"] = c(br(4) * br(5) / (br(7) * br(8)))
    x4 = mp.expj(mp.mpf("0.4"))
    br4 = lambda k: x4**k - x4 ** (-k)
    out["kappa2_m1_lambda0.4"] = c(-br4(2) / br4(4))

    om = mp.expj(mp.pi / 5)
    out["j_eigenvalue_a1_b4_d1"] = {
        str(n): c((-1) ** n * (-(om**4 + om ** (-4)) + 1)) for n in (1, 2, 3)
    }

    u8 = mp.mpf("0.8")
    out["inversion_scalar_u0.8"] = c(weights(u8, lam)[7] * weights(-u8, lam)[7])

    ug = mp.mpc("0.37", "0.2")
    out["weights_u0.37+0.2i"] = [c(r) for r in weights(ug, lam)]

    n = 4
    xi = [mp.mpc(mp.mpf("0.13") * j, mp.mpf("0.05") - mp.mpf("0.02") * j) for j in range(n)]
    omega = mp.expj(mp.mpf("0.7"))
    ut = mp.mpc("0.37", "0.1")
    out["all_defect_row_N4"] = c(all_defect_row(n, ut, lam, xi, omega))

    OUT.write_text(json.dumps(out, indent=1) + "\n")
    json.dump(out, sys.stdout, indent=1)


if __name__ == "__main__":
    main()
