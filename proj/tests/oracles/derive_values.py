#!/usr/bin/env python3
"""Independent re-evaluation of the values frozen into tests/oracles/frozen_values.hpp.

Parameters of every fixture network are filled deterministically with
    value_j = 0.7 * sin(0.37 * j + phase)
where j counts over weights (row-major) then bias of each layer, layers in
order, networks in the model's canonical order. The C++ tests rebuild the
same fixtures with fill_parameters() from oracle_fixtures.hpp.

Run:  python3 tests/oracles/derive_values.py > tests/oracles/frozen_values.hpp
"""
import math

import numpy as np


def fill(shapes, phase, start=0):
    j = start
    layers = []
    for out_dim, in_dim in shapes:
        w = np.empty((out_dim, in_dim))
        for r in range(out_dim):
            for c in range(in_dim):
                w[r, c] = 0.7 * math.sin(0.37 * j + phase)
                j += 1
        b = np.empty(out_dim)
        for r in range(out_dim):
            b[r] = 0.7 * math.sin(0.37 * j + phase)
            j += 1
        layers.append((w, b))
    return layers, j


def shapes(in_dim, out_dim, depth, width):
    dims = [in_dim] + [width] * depth + [out_dim]
    return [(dims[t + 1], dims[t]) for t in range(len(dims) - 1)]


def elu(a):
    return np.where(a > 0, a, np.expm1(np.minimum(a, 0)))


def run(layers, x):
    h = np.asarray(x, dtype=float)
    for t, (w, b) in enumerate(layers):
        a = w @ h + b
        h = a if t == len(layers) - 1 else elu(a)
    return h


def node_l1(layers):
    return max(float(np.max(np.abs(w).sum(axis=1) + np.abs(b))) for w, b in layers)


def softmax(u, avail):
    u = np.asarray(u, dtype=float)
    m = max(u[i] for i in range(len(u)) if avail[i])
    e = np.array([math.exp(u[i] - m) if avail[i] else 0.0 for i in range(len(u))])
    return e / e.sum()


def emit(name, v):
    print(f"inline constexpr double {name} = {float(v)!r};")


def emit_array(name, vals):
    body = ", ".join(repr(float(v)) for v in vals)
    print(f"inline constexpr std::array<double, {len(vals)}> {name} = {{{body}}};")


print("#pragma once")
print("// Generated by tests/oracles/derive_values.py. Do not edit by hand.")
print("#include <array>")
print("#include <cstdint>")
print()
print("namespace oracle {")
print()

# Dense network (in 3, out 2, depth 2, width 4), phase 0.1.
net, _ = fill(shapes(3, 2, 2, 4), 0.1)
x = [0.3, -1.2, 2.0]
emit_array("kDenseOutput", run(net, x))
emit("kDenseNodeL1", node_l1(net))

# RUMnet d_x 3, d_z 2, K 2, d_eps 2, d_nu 2, every net depth 1 width 3, phase 0.4,
# one global counter over utility, eps_1, eps_2, nu_1, nu_2.
d_x, d_z, K, d_eps, d_nu = 3, 2, 2, 2, 2
j = 0
util, j = fill(shapes(d_x + d_eps + d_z + d_nu, 1, 1, 3), 0.4, j)
eps = []
for _ in range(K):
    n_, j = fill(shapes(d_x, d_eps, 1, 3), 0.4, j)
    eps.append(n_)
nus = []
for _ in range(K):
    n_, j = fill(shapes(d_z, d_nu, 1, 3), 0.4, j)
    nus.append(n_)
products = [[0.5, -0.2, 1.0], [1.5, 0.3, -0.7], [-0.4, 0.8, 0.2], [0.0, 1.1, -1.3]]
avail = [True, False, True, True]
z = [0.6, -0.9]
utils = []
probs = np.zeros(len(products))
for k1 in range(K):
    for k2 in range(K):
        nu = run(nus[k2], z)
        u = [float(run(util, np.concatenate([p, run(eps[k1], p), z, nu]))[0]) for p in products]
        utils.extend(u)
        probs += softmax(u, avail)
probs /= K * K
emit_array("kRumnetSampleUtilities", utils)
emit_array("kRumnetProbabilities", probs)

# Theory calculators.
kappa, T, M, ell, delta, eps_ = 3, 10000, 1.0, 2, 0.05, 0.1
c1 = c2 = 1.0
complexity = c1 * kappa * math.sqrt(kappa) / math.sqrt(T) * math.exp(2 * M) * M**ell
confidence = 4 * c2 * math.sqrt(2 * math.log(4 / delta) / T)
emit("kGapComplexity", complexity)
emit("kGapConfidence", confidence)
emit("kGap", complexity + confidence)
inner = math.ceil(16 / (max(c1 * c1, c2 * c2) * eps_**2) * kappa**3 * math.exp(4 * M) * M ** (2 * ell))
k_prime = math.ceil(math.log(1 / delta) / (2 * eps_**2) * (kappa * math.exp(2 * M)) ** 2 * math.log(inner))
print(f"inline constexpr std::uint64_t kCompactKInner = {inner};")
print(f"inline constexpr std::uint64_t kCompactK = {k_prime};")
emit("kPminKappa5M1", math.exp(-2.0) / 5)

# Loss with tolerance: probs (1, 0), chosen the zero one.
emit("kLossZeroProb", -math.log(1e-4 / (1 + 2 * 1e-4)))

print()
print("}  // namespace oracle")
