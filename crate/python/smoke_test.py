"""Exercise every binding once; exits non-zero on the first failure."""

import json
import math

import noisylab as nl


def close(a, b, tol=1e-9):
    assert abs(a - b) <= tol, (a, b)


def main():
    print("noisylab", nl.__version__)

    assert nl.bound_majority(0.25, 0.01) == 111
    assert nl.bound_thm3(8, 0.25, 0.1, 0.1) > nl.bound_majority(0.25, 0.1)
    assert nl.bound_minwt(16, 10, 0.01) > 0
    assert nl.bound_infected(16, 0.1, 1 / 16, 0.05) > 0
    try:
        nl.bound_majority(0.5, 0.01)
    except ValueError:
        pass
    else:
        raise AssertionError("eta = 1/2 must be rejected")

    # x0 + x1 = 1, x1 + x2 = 0 over GF(2): x2 is free.
    x, free = nl.gf2_solve([[True, True, False], [False, True, True]], [True, False])
    assert free == [2] and x == [True, False, False], (x, free)
    assert nl.gf2_solve([[True], [True]], [True, False]) is None

    close(nl.circular_segment_fraction(0.0), 0.0)
    close(nl.circular_segment_fraction(1.0), 0.5)
    close(nl.circular_segment_fraction(2.0), 1.0)

    r = 1 / (2 * math.sqrt(2)) - 0.008
    nat, adv = nl.parity_ball_risks(0.1, r, 6)
    assert nat == 0.0 and adv == 0.0
    nat, adv = nl.linear_ball_risks([1.0, -1.0], -0.5, 0.1, r, 6)
    assert 0.0 <= nat <= adv <= 1.0

    model = nl.IntervalParityModel.random(8, 16, 7)
    assert len(model.zeta) == 16
    xs, ys = model.sample(4000, eta=0.25, seed=3)
    learned = nl.learn_parity(xs, ys, 8)
    nat, adv = model.parity_risks(learned, 0.1)
    assert nat == 0.0 and adv == 0.0, (learned, model.parity_set)
    pieces = nl.learn_union_intervals(xs, ys)
    nat_u, adv_u = model.union_risks(pieces, 0.1)
    assert nat_u <= adv_u and adv_u > 0.0

    net = nl.Mlp([2, 8, 3], seed=1)
    logits = net.forward([[0.1, 0.2], [-1.0, 0.5]])
    assert len(logits) == 2 and len(logits[0]) == 3
    assert net.predict([[0.1, 0.2]])[0] == max(range(3), key=lambda i: logits[0][i])
    assert net.num_params == 2 * 8 + 8 + 8 * 3 + 3
    back = nl.Mlp.from_json(net.to_json())
    assert back.forward([[0.1, 0.2]]) == logits[:1]
    assert json.loads(net.to_json())["widths"] == [2, 8, 3]
    assert net.loss([[0.1, 0.2]], [0]) > 0.0

    print("smoke test ok")


if __name__ == "__main__":
    main()
