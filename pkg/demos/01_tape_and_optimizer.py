"""Tour of the numeric kernel: tape autodiff, MLPs, Adam, soft updates.

Fits a tiny network to y = sin(3x), checks its analytic gradients against
central finite differences, and shows a Polyak target net trailing the online
net.  Everything prints; nothing is written to disk.
"""
import numpy as np

from hyar import numkit as nk


def fit_sine():
    rng = np.random.default_rng(0)
    xs = rng.uniform(-1.0, 1.0, size=(256, 1))
    ys = np.sin(3.0 * xs)

    spec = nk.LayerSpec.mlp([1, 32, 32, 1])
    params = nk.init_params(spec, rng)
    opt = nk.AdamState(params, lr=1e-3)

    print("fitting y = sin(3x) with a [1, 32, 32, 1] MLP")
    for step in range(2001):
        tape = nk.Tape()
        pv = nk.param_vars(params)
        out = nk.mlp_apply(tape, spec, pv, nk.const(xs))
        loss = tape.msq_to(out, ys)
        tape.backward(loss)
        grads = {n: v.grad for n, v in pv.items() if v.grad is not None}
        nk.adam_step(params, grads, opt)
        if step % 400 == 0:
            print(f"  step {step:4d}  mse {float(loss.data):.5f}")
    return spec, params


def gradient_check(spec, params):
    rng = np.random.default_rng(1)
    xs = rng.uniform(-1.0, 1.0, size=(8, 1))
    ys = np.sin(3.0 * xs)

    tape = nk.Tape()
    pv = nk.param_vars(params)
    loss = tape.msq_to(nk.mlp_apply(tape, spec, pv, nk.const(xs)), ys)
    tape.backward(loss)
    grads = {n: v.grad for n, v in pv.items() if v.grad is not None}

    def loss_fn():
        t = nk.Tape(record=False)
        return float(t.msq_to(
            nk.mlp_apply(t, spec, nk.param_vars(params), nk.const(xs)),
            ys).data)

    report = nk.finite_diff_check(loss_fn, params, grads, samples_per_entry=8)
    print("\nfinite-difference check (8 coordinates per entry):")
    for name in params.names():
        print(f"  {name:4s} rel err {report[name]:.2e}")
    print(f"  worst {report['max']:.2e}  (gradcheck budget is 1e-4)")


def soft_update_demo(spec, params):
    rng = np.random.default_rng(2)
    target = nk.init_params(spec, rng)
    print("\nPolyak averaging, tau = 0.2: target trails the online net")
    for i in range(6):
        gap = float(np.max(np.abs(target.flat - params.flat)))
        print(f"  after {i} updates, max |target - online| = {gap:.4f}")
        nk.soft_update(target, params, 0.2)


def main():
    spec, params = fit_sine()
    gradient_check(spec, params)
    soft_update_demo(spec, params)


if __name__ == "__main__":
    main()
