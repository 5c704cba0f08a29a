#!/usr/bin/env python3
"""Covariance expansion terms: three computation routes and finite-L checks.

The covariance of smooth statistics of the L-rescaled measure expands over
even orders of 1/L with coefficients built from kernel moments and derivative
inner products. This script computes the leading coefficients by three
independent routes (spatial quadrature, frequency sums, radial reduction),
then compares the exact transform-side covariance at finite L against the
truncated expansion.

Run:  python demos/02_covariance_expansion.py
"""

import math

from covasym.expansion import (
    covariance_exact_fourier,
    format_expansion_term,
    gaussian_bump,
    predict_asymptotics,
    q_term_fourier,
    q_term_isotropic,
    q_term_spatial,
    variance_upper_bound,
)
from covasym.kernels import kernel_gef_zeros, kernel_ginibre, kernel_poisson

ZETA3 = 1.2020569031595943
bump = gaussian_bump(2)

print("Order-by-order terms, three routes (Gaussian profile test function)")
print("=" * 72)
for kernel in (kernel_poisson(2, 1.0), kernel_ginibre(), kernel_gef_zeros()):
    print(f"\n--- {kernel.name} ---")
    for m in (0, 2, 4):
        spatial = q_term_spatial(kernel, bump, bump, m)
        fourier = q_term_fourier(kernel, bump, bump, m)
        iso = q_term_isotropic(kernel, bump, bump, m // 2)
        print(
            f"  m={m}: spatial {spatial.value:+.9f}  "
            f"frequency {fourier.value:+.9f}  radial {iso.value:+.9f}"
        )
        print(f"        record: {format_expansion_term(spatial)}")

print("\nReference constants: Ginibre m=2 -> 1/4 = 0.25;")
print(f"GEF m=4 -> zeta(3)/8 = {ZETA3 / 8:.9f} for this profile.")

print("\nPredicted leading asymptotics")
print("=" * 72)
for kernel in (kernel_poisson(2, 1.0), kernel_ginibre(), kernel_gef_zeros()):
    pred = predict_asymptotics(kernel, bump, bump)
    print(
        f"  {kernel.name:24s} {pred.classification:20s} "
        f"Cov ~ {pred.leading_constant:.6f} * L^{pred.leading_exponent}"
    )

print("\nExact transform-side covariance vs the truncated expansion (Ginibre)")
print("=" * 72)
gin = kernel_ginibre()
q2 = q_term_spatial(gin, bump, bump, 2).value
q4 = q_term_spatial(gin, bump, bump, 4).value
print(f"  Q2 = {q2:.9f}, Q4 = {q4:.9f}")
print(f"  {'L':>4s} {'exact':>12s} {'Q2':>12s} {'Q2+Q4/L^2':>12s} {'residual':>11s}")
for L in (4.0, 8.0, 16.0, 32.0, 64.0):
    exact = covariance_exact_fourier(gin, bump, bump, L)
    two_terms = q2 + q4 / L**2
    print(
        f"  {L:4.0f} {exact:12.8f} {q2:12.8f} {two_terms:12.8f} "
        f"{exact - two_terms:+.3e}"
    )
print("  (the residual falls faster than the guaranteed O(L^{-1});")
print("   only alternate powers of L appear in the expansion)")

print("\nScale-free Sobolev variance bounds")
print("=" * 72)
for kernel, k in ((kernel_poisson(2, 1.0), 0), (kernel_ginibre(), 1), (kernel_gef_zeros(), 2)):
    bound = variance_upper_bound(kernel, bump, k)
    print(f"  {kernel.name:24s} order k={k}: Var(X_L(f)) <= {bound:.6f} * L^(2-2k)")
print("  (dominance over the exact transform-side variance is part of the")
print("   acceptance suite, every kernel x function x L cell)")
