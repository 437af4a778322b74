"""Smoke test for the uplink_meta extension module.

Build and install with `maturin develop --release` (or `pip install .`) from
crates/python, then run `python python/smoke_test.py`.
"""

import uplink_meta as um


def main():
    p = um.SystemParams(compensation=0.8)
    gammas = [0.1, 0.5, 0.9]

    proposed = um.meta_proposed(p, 1.0, gammas)
    beta = um.meta_beta(p, 1.0, gammas)
    assert all(0.0 <= v <= 1.0 for v in proposed + beta)
    assert proposed == sorted(proposed, reverse=True)
    assert max(abs(a - b) for a, b in zip(proposed, beta)) < 0.07

    m1 = um.moment(p, 1.0, 1.0)
    m2 = um.moment(p, 1.0, 2.0)
    assert 1.0 >= m1 >= m2 > m1 * m1
    assert abs(um.moment(p, 1.0, 1.0, "scaled-laplace") - m1) < 1e-10

    values, ci = um.meta_simulated(p, [1.0], gammas, n_realizations=40, seed=7)
    assert len(values) == 1 and len(values[0]) == len(gammas)
    assert max(abs(a - b) for a, b in zip(proposed, values[0])) < 0.06

    try:
        um.SystemParams(path_loss=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid path loss accepted")

    print("uplink_meta", um.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
