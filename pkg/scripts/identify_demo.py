"""Grey-box identification demo on synthetic measurements.

Draws noisy samples from the shipped chiller capacity map and from a
first-order thermal ramp, runs both identification routines, and prints
recovered next to true parameters.

Usage:
    python3 scripts/identify_demo.py [--noise 0.01] [--seed 1] [--samples 120]
"""

import argparse

import numpy as np

from polyplant import (eval_map, fit_map, fit_step_response, load_plant,
                       monomial_name, BASIS_EXPONENTS)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise", type=float, default=0.01,
                    help="multiplicative noise sigma on the map samples")
    ap.add_argument("--samples", type=int, default=120)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    plant = load_plant("configs/plant.json")
    truth = plant.adcm.cooling_map

    # steady-state map samples over the chiller's working envelope
    lt = rng.uniform(10.0, 22.0, args.samples)
    ht = rng.uniform(55.0, 85.0, args.samples)
    mt = rng.uniform(27.0, 40.0, args.samples)
    samples = []
    for x in zip(lt, ht, mt):
        y = eval_map(truth, x) * (1.0 + args.noise * rng.standard_normal())
        samples.append((x, y))
    fit = fit_map(samples, n_vars=3, normalize=True)

    print("chiller capacity map (kW):")
    print(f"  {'term':<10} {'true':>10} {'fitted':>10}")
    for exps, a, b in zip(BASIS_EXPONENTS[3], truth.coeffs, fit.map.coeffs):
        print(f"  {monomial_name(exps):<10} {a:>10.4f} {b:>10.4f}")
    print(f"  relative objective: {fit.objective:.3e}")

    # step response of the cogeneration unit's thermal output
    chp = plant.chp
    t = np.arange(0.0, 6.0 * chp.time_constant, 5.0)
    clean = chp.p_th_nom * (1.0 - np.exp(-t / chp.time_constant))
    noisy = clean + args.noise * chp.p_th_nom * rng.standard_normal(t.size)
    noisy[0] = 0.0  # a step test starts from rest
    step = fit_step_response(list(zip(t, noisy)), u=1.0)

    print("thermal ramp (unit step drives the nominal output):")
    print(f"  gain          true {chp.p_th_nom:>9.1f}  fitted {step.k_s:>9.1f}")
    print(f"  time constant true {chp.time_constant:>9.2f}  fitted {step.t_s:>9.2f}")


if __name__ == "__main__":
    main()
