"""Quick end-to-end check of the qkdv_py extension at k = -5/2, r1bar = 1, r2bar = 0."""

import math

import qkdv_py as q

K, R1, R2 = -2.5, 1.0, 0.0


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    p = q.params(K, R1, R2)
    assert close(p["c"], -15.0, 1e-12), p
    assert close(p["delta2"], -7.0 / 18.0, 1e-12), p
    assert close(p["delta3"], 2 ** -1.5 / 27.0, 1e-12), p

    sols = q.solve(1, K, R1, R2)
    assert len(sols) == q.expected_count(1) == 2
    ws = sorted(s[1][0].real for s in sols)
    assert close(ws[0], -1.9375771573, 1e-9) and close(ws[1], -0.0624228427, 1e-9), ws
    assert all(s[2] < 1e-10 for s in sols)

    (qs, qstars), = q.q_values(K, R1, R2, [0.3 + 0.1j])
    assert len(qs) == 3 and len(qstars) == 3
    assert all(math.isfinite(abs(x)) for x in qs + qstars)

    assert q.qq_residual(K, R1, R2, sector="id", n_base=8) < 1e-8
    a, w = sols[0][0], sols[0][1]
    assert q.qq_residual(K, R1, R2, sector="sigma", n_base=8, a=a, w=w) < 1e-4

    roots = q.bethe_roots(K, R1, R2, e_max=20.0, samples=30)
    assert len(roots) == 1, roots
    lam, ba = roots[0]
    assert close(lam.real, -1.0158017895, 1e-8) and ba < 1e-4, roots

    try:
        q.params(-3.5, R1, R2)
    except ValueError:
        pass
    else:
        raise AssertionError("k outside (-3, -2) was accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
