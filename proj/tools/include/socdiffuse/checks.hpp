#pragma once

#include "socdiffuse/config.hpp"
#include "socdiffuse/report.hpp"

#include <cstdint>

/// Invariant checks shared by `socdiffuse verify` suites and the verify-*
/// experiment kinds. Each function appends its checks (and any tables) to
/// the report.
namespace socdiffuse::checks {

/// Deterministic Euler bridge: terminal error at dt and the O(dt) slope.
void bridge(RunReport& r, const Vector& x0, const Vector& x1, double dt);

/// Euler-Maruyama bridge over `paths` seeds: terminal mean within 3
/// standard errors of x1.
void bridge_noise(RunReport& r, const Vector& x0, const Vector& x1, double dt, int paths,
                  std::uint64_t seed);

/// Pure-control LQ instance with finite gamma: shooting oracle against the
/// closed-form state, costate and feedback law; costate constancy.
void style_shooting(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x0, double t0,
                    double gamma, int grid_points);

/// Finite-gamma controller error against the infinite-gamma flag path.
void gamma_sweep(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x, double t,
                 const std::vector<double>& gammas);

/// Infinite-gamma simulation: |A X(1-dt) - y1| at dt and its O(dt) slope.
void terminal_satisfaction(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x0,
                           double dt, const std::string& label);

/// style_controller with A = I against bridge_controller at random points.
void reduction_identity(RunReport& r, std::uint64_t seed);

/// State-plus-control closed form against the shooting oracle.
void prop2(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x0, double gamma,
           int grid_points, const std::string& label);

/// Scalar gamma = 1, A = 1, y1 = 0, x0 = 1 terminal value: oracle vs
/// 1/cosh(1), then the pinned regression constant.
void prop2_scalar_terminal(RunReport& r);

/// HJB residuals: bridge value function on a 20x20x10 grid, its +t
/// perturbation, a constant, and the scalar Riccati value function.
void hjb(RunReport& r, const Vector& x1);

void afa(RunReport& r, const AfaSpec& spec, std::uint64_t seed);

/// Tweedie on Gaussians (every schedule step), mixture posterior means vs
/// quadrature (both paths), and the flow-remark drift identity.
void posterior_means(RunReport& r, std::uint64_t seed);
/// Schedules, posterior_means, score consistency, DDIM determinism and
/// marginal preservation.
void diffusion_core(RunReport& r, std::uint64_t seed);
void style_features(RunReport& r, std::uint64_t seed);

/// Gaussian-prior / linear-feature benchmark at eta = 0.1, M = 3, T = 50:
/// cost reduction and the M = 0 bitwise baseline.
void algorithm1_benchmark(RunReport& r, std::uint64_t seed, int num_seeds, int threads);
/// Same benchmark for the proximal sampler: structural gradient counter,
/// cost reduction, error ratio against Algorithm 1, lambda -> infinity
/// collapse and the ridge oracle.
void algorithm2_benchmark(RunReport& r, std::uint64_t seed, int num_seeds, int threads);

/// Both benchmarks plus the remaining sampler invariants, over `num_seeds`
/// seeds starting at `seed`.
void soc_sampler(RunReport& r, std::uint64_t seed, int num_seeds, int threads);

}  // namespace socdiffuse::checks
