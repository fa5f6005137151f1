"""How the four dependency measures compare across relationship shapes.

Pearson correlation only sees linear structure, Spearman any monotone
structure, and MIC (a normalized maximum of binned mutual information over
admissible grids) picks up arbitrary functional shapes, at the price of a
higher noise floor on small samples.
"""

import numpy as np

from influence_scope import linear_correlation, mic, rank_correlation


def describe(name, x, y):
    pearson = linear_correlation(x, y).value
    spearman = rank_correlation(x, y).value
    coefficient = mic(x, y).value
    print(f"{name:<22} pearson={pearson:+.3f}  spearman={spearman:+.3f}  mic={coefficient:.3f}")


def main():
    rng = np.random.default_rng(0)
    n = 400
    x = rng.uniform(-1, 1, size=n)

    describe("linear", x, 2 * x + 0.1 * rng.standard_normal(n))
    describe("monotone (cubic)", x, x**3 + 0.05 * rng.standard_normal(n))
    describe("parabola", x, x**2 + 0.05 * rng.standard_normal(n))
    describe("circle-ish", np.cos(np.pi * x), np.sin(np.pi * x) * rng.choice([-1, 1], n))
    describe("independent noise", x, rng.standard_normal(n))

    print("\nnote how the parabola is invisible to both correlations but not to MIC,")
    print("and how MIC stays near its small-sample noise floor for pure noise.")


if __name__ == "__main__":
    main()
