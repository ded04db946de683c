#include "socdiffuse/checks.hpp"

#include "socdiffuse/oracles.hpp"
#include "socdiffuse/sampling.hpp"

#include <rbm/attention.hpp>
#include <rbm/control.hpp>
#include <rbm/diffusion.hpp>
#include <rbm/hjb.hpp>
#include <rbm/matrix_io.hpp>
#include <rbm/numerics.hpp>
#include <rbm/sampler.hpp>
#include <rbm/shooting.hpp>
#include <rbm/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

namespace socdiffuse::checks {

using namespace rbm;
using control::DriftMode;

namespace {

std::string fmt(double v) { return format_double(v); }

// Sup-norm relative error of a trajectory: max_t |a - b| / max_t |b|.
// Pointwise ratios blow up where a trajectory passes through zero.
struct SupRelative {
  double error = 0.0;
  double scale = 0.0;
  void add(const Vector& a, const Vector& b) {
    error = std::max(error, (a - b).norm());
    scale = std::max(scale, b.norm());
  }
  double value() const { return error / std::max(scale, 1e-12); }
};

Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

const std::vector<double> kStepSweep = {1e-2, 1e-3, 1e-4};

}  // namespace

void bridge(RunReport& r, const Vector& x0, const Vector& x1, double dt) {
  const auto run = [&](double h) {
    const control::Controller u = [&](const Vector& x, double t) {
      return control::bridge_controller(x, t, x1, Gamma::infinite());
    };
    const auto traj = control::simulate_controlled(u, x0, {.initial_time = 0.0, .step = h});
    return (traj.final_state().values - x1).norm();
  };
  r.add(check_less("bridge terminal error |X(1-dt) - x1| at dt=" + fmt(dt), run(dt), 1e-2));

  Table table{"bridge_convergence.csv", {"dt", "terminal_error"}, {}};
  std::vector<double> errors;
  for (double h : kStepSweep) {
    errors.push_back(run(h));
    table.rows.push_back({h, errors.back()});
  }
  r.add(check_near("bridge terminal error log-log slope in dt", loglog_slope(kStepSweep, errors),
                   1.0, 0.15));
  r.tables.push_back(std::move(table));
}

void bridge_noise(RunReport& r, const Vector& x0, const Vector& x1, double dt, int paths,
                  std::uint64_t seed) {
  const control::Controller u = [&](const Vector& x, double t) {
    return control::bridge_controller(x, t, x1, Gamma::infinite());
  };
  Matrix ends(x0.size(), paths);
  for (int i = 0; i < paths; ++i) {
    control::SimulationOptions opt{.initial_time = 0.0, .step = dt};
    opt.noise_seed = seed + static_cast<std::uint64_t>(i);
    ends.col(i) = control::simulate_controlled(u, x0, opt).final_state().values;
  }
  const Vector mean = ends.rowwise().mean();
  double worst = 0.0;
  for (Eigen::Index c = 0; c < x0.size(); ++c) {
    const double var = (ends.row(c).array() - mean[c]).square().sum() / (paths - 1);
    const double se = std::sqrt(var / paths);
    worst = std::max(worst, std::abs(mean[c] - x1[c]) / (3.0 * se));
  }
  r.add(check_at_most("noisy bridge terminal mean offset from x1 in units of 3 standard errors (" +
                          std::to_string(paths) + " paths)",
                      worst, 1.0));
}

void style_shooting(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x0, double t0,
                    double gamma, int grid_points) {
  control::LQInstance inst{a, y1, x0, t0, Gamma::finite(gamma), DriftMode::PureControl};
  const auto sol = control::shooting_bvp_solve(inst, grid_points);
  const Vector p = control::pure_control_costate(inst);
  SupRelative state_err, costate_err, control_err;
  double drift = 0.0;
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const double t = sol.times[i];
    const Vector x_closed = x0 - p * (t - t0);
    state_err.add(x_closed, sol.states[i]);
    costate_err.add(p, sol.costates[i]);
    if (t < 1.0) {
      const Vector u = control::style_controller(sol.states[i], t, a, y1, Gamma::finite(gamma));
      control_err.add(u, sol.control(i));
    }
    drift = std::max(drift, (sol.costates[i] - sol.costates[0]).lpNorm<Eigen::Infinity>());
  }
  const std::string tag = " (pure-control, gamma=" + fmt(gamma) + ")";
  r.add(check_at_most("shooting vs closed-form state, max relative error" + tag, state_err.value(), 1e-6));
  r.add(check_at_most("shooting vs closed-form costate, max relative error" + tag, costate_err.value(), 1e-6));
  r.add(check_at_most("shooting -p vs style_controller feedback, max relative error" + tag,
                      control_err.value(), 1e-6));
  r.add(check_at_most("shooting costate constancy max |p(t) - p(t0)|" + tag, drift, 1e-8));
  const Vector terminal_costate = gamma * a.transpose() * (a * sol.terminal_state - y1);
  r.add(check_at_most("shooting terminal boundary residual" + tag,
                      (sol.costates.back() - terminal_costate).lpNorm<Eigen::Infinity>(), 1e-8));
}

void gamma_sweep(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x, double t,
                 const std::vector<double>& gammas) {
  const Vector limit = control::style_controller(x, t, a, y1, Gamma::infinite());
  Table table{"gamma_sweep.csv", {"gamma", "controller_error"}, {}};
  std::vector<double> errors;
  for (double g : gammas) {
    errors.push_back((control::style_controller(x, t, a, y1, Gamma::finite(g)) - limit).norm());
    table.rows.push_back({g, errors.back()});
  }
  r.add(check_near("finite-gamma controller convergence log-log slope in gamma",
                   loglog_slope(gammas, errors), -1.0, 0.1));
  r.tables.push_back(std::move(table));
}

void terminal_satisfaction(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x0,
                           double dt, const std::string& label) {
  const auto run = [&](double h) {
    const control::Controller u = [&](const Vector& x, double t) {
      return control::style_controller(x, t, a, y1, Gamma::infinite());
    };
    const auto traj = control::simulate_controlled(u, x0, {.initial_time = 0.0, .step = h});
    return (a * traj.final_state().values - y1).norm();
  };
  r.add(check_less(label + " feature error |A X(1-dt) - y1| at dt=" + fmt(dt), run(dt), 1e-2));
  std::vector<double> errors;
  for (double h : kStepSweep) errors.push_back(run(h));
  r.add(check_near(label + " feature error log-log slope in dt", loglog_slope(kStepSweep, errors),
                   1.0, 0.15));
}

void reduction_identity(RunReport& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time(0.0, 0.99);
  const Matrix eye = Matrix::Identity(2, 2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector x = random_vector(rng, 2, 2.0);
    const Vector x1 = random_vector(rng, 2, 2.0);
    const double t = time(rng);
    for (Gamma g : {Gamma::infinite(), Gamma::finite(3.0)}) {
      const Vector a = control::style_controller(x, t, eye, x1, g);
      const Vector b = control::bridge_controller(x, t, x1, g);
      worst = std::max(worst, (a - b).lpNorm<Eigen::Infinity>());
    }
  }
  r.add(check_at_most("style_controller(A=I) vs bridge_controller max abs difference", worst, 1e-12));
}

void prop2(RunReport& r, const Matrix& a, const Vector& y1, const Vector& x0, double gamma,
           int grid_points, const std::string& label) {
  control::LQInstance inst{a, y1, x0, 0.0, Gamma::finite(gamma), DriftMode::StatePlusControl};
  const control::ModulatedSystem closed(inst);
  const auto sol = control::shooting_bvp_solve(inst, grid_points);
  SupRelative state_err, costate_err;
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const auto pt = closed.at(sol.times[i]);
    state_err.add(pt.state, sol.states[i]);
    costate_err.add(pt.costate, sol.costates[i]);
  }
  const std::string tag = " (" + label + ")";
  r.add(check_at_most("modulated closed-form state vs shooting, max relative error" + tag,
                      state_err.value(), 1e-6));
  r.add(check_at_most("modulated closed-form costate vs shooting, max relative error" + tag,
                      costate_err.value(), 1e-6));
  const Vector x1 = closed.terminal_state();
  const Vector p1 = gamma * a.transpose() * (a * x1 - y1);
  r.add(check_at_most("modulated x(0) = x0" + tag, (closed.at(0.0).state - x0).norm(), 1e-10));
  r.add(check_at_most("modulated x(1) = x1" + tag, (closed.at(1.0).state - x1).norm(), 1e-10));
  r.add(check_at_most("modulated p(1) = gamma A^T (A x1 - y1)" + tag,
                      (closed.at(1.0).costate - p1).norm(), 1e-10));
}

void prop2_scalar_terminal(RunReport& r) {
  control::LQInstance inst{Matrix::Ones(1, 1), Vector::Zero(1), Vector::Ones(1), 0.0,
                           Gamma::finite(1.0), DriftMode::StatePlusControl};
  const auto sol = control::shooting_bvp_solve(inst, 100);
  const double oracle = sol.terminal_state[0];
  r.add(check_near("shooting oracle terminal x1 vs analytic candidate 1/cosh(1)", oracle,
                   1.0 / std::cosh(1.0), 1e-8));
  r.add(check_near("closed-form terminal x1 vs pinned 0.6481", control::solve_terminal_state_prop2(inst)[0],
                   0.6481, 5e-5));
  r.add(check_near("shooting p(0) vs Riccati value-function gradient P(0) x0", sol.costates[0][0],
                   oracle::riccati_p(1.0, 0.0), 1e-8));
}

void hjb(RunReport& r, const Vector& x1) {
  const auto v = control::bridge_value_function(x1);
  const control::ValueFunction perturbed(
      [&](const Vector& x, double t) { return v.value(x, t) + t; },
      [&](const Vector& x, double t) { return v.gradient(x, t); },
      [&](const Vector& x, double t) { return v.time_derivative(x, t) + 1.0; });
  const control::ValueFunction constant([](const Vector&, double) { return 3.0; });

  double bridge_res = 0.0, perturbed_res = 0.0, constant_res = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      for (int k = 0; k < 10; ++k) {
        Vector x(2);
        x << -2.0 + 4.0 * i / 19.0, -2.0 + 4.0 * j / 19.0;
        const double t = 0.9 * k / 9.0;
        bridge_res = std::max(bridge_res,
                              std::abs(control::hjb_residual(v, x, t, DriftMode::PureControl)));
        perturbed_res = std::max(
            perturbed_res,
            std::abs(control::hjb_residual(perturbed, x, t, DriftMode::PureControl) - 1.0));
        constant_res = std::max(
            constant_res, std::abs(control::hjb_residual(constant, x, t, DriftMode::PureControl)));
      }
    }
  }
  r.add(check_less("bridge value function max |HJB residual| on 20x20x10 grid", bridge_res, 1e-8));
  r.add(check_at_most("perturbed (+t) value function max |residual - 1|", perturbed_res, 1e-8));
  r.add(check_at_most("constant value function max |residual|", constant_res, 1e-8));

  const double gamma = 1.0;
  const control::ValueFunction riccati(
      [gamma](const Vector& x, double t) { return 0.5 * oracle::riccati_p(gamma, t) * x.squaredNorm(); },
      [gamma](const Vector& x, double t) -> Vector { return oracle::riccati_p(gamma, t) * x; },
      [gamma](const Vector& x, double t) {
        return 0.5 * oracle::riccati_p_dot(gamma, t) * x.squaredNorm();
      });
  double riccati_res = 0.0;
  for (int i = 0; i < 41; ++i) {
    for (int k = 0; k < 10; ++k) {
      const Vector x = Vector::Constant(1, -2.0 + 0.1 * i);
      riccati_res = std::max(riccati_res, std::abs(control::hjb_residual(
                                              riccati, x, 0.1 * k, DriftMode::StatePlusControl)));
    }
  }
  r.add(check_less("Riccati value function max |HJB residual| (state-plus-control)", riccati_res,
                   1e-8));
}

namespace {

Matrix oracle_attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale, int heads) {
  const Eigen::Index qk = k.cols() / heads, hv = v.cols() / heads;
  Matrix out(q.rows(), v.cols());
  for (int h = 0; h < heads; ++h) {
    out.middleCols(h * hv, hv) = oracle::attention_bruteforce(
        q.middleCols(h * qk, qk), k.middleCols(h * qk, qk), v.middleCols(h * hv, hv), scale);
  }
  return out;
}

Matrix oracle_branch(const Matrix& q, const std::vector<const afa::AttentionBranch*>& parts,
                     double scale, int heads) {
  std::vector<Matrix> ks, vs;
  for (const auto* p : parts) {
    ks.push_back(p->keys);
    vs.push_back(p->values);
  }
  return oracle_attention(q, oracle::stack_rows(ks), oracle::stack_rows(vs), scale, heads);
}

}  // namespace

void afa(RunReport& r, const AfaSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> token_count(1, spec.tokens);
  const double scale = spec.scale.value_or(afa::default_scale(spec.key_width));
  const int heads = spec.heads;
  const auto branch = [&] {
    const int m = token_count(rng);
    return afa::AttentionBranch{random_matrix(rng, m, spec.key_width),
                                random_matrix(rng, m, spec.value_width)};
  };

  double stylize_err = 0.0, compose_err = 0.0, row_sum = 0.0, hull = 0.0, perm = 0.0;
  double mean_err = 0.0, duplicate_gap = 1e300;
  std::size_t stylize_branches = 0, compose_branches = 0;
  for (int n = 0; n < spec.instances; ++n) {
    const Matrix q = random_matrix(rng, spec.query_tokens, spec.key_width);
    const auto base = branch(), prompt = branch(), style = branch(), content = branch();

    const auto st = afa::afa_stylize(q, base, prompt, style, scale, heads);
    const Matrix st_oracle = (oracle_branch(q, {&base, &prompt}, scale, heads) +
                              oracle_branch(q, {&base, &style}, scale, heads) +
                              oracle_branch(q, {&base, &prompt, &style}, scale, heads)) /
                             3.0;
    stylize_err = std::max(stylize_err, (st.output - st_oracle).cwiseAbs().maxCoeff());
    stylize_branches = st.branches.size();
    mean_err = std::max(mean_err,
                        (st.output - (st.branches[0] + st.branches[1] + st.branches[2]) / 3.0)
                            .cwiseAbs()
                            .maxCoeff());

    const auto co = afa::afa_compose(q, base, prompt, style, content, scale, heads);
    const Matrix co_oracle = (oracle_branch(q, {&base, &prompt}, scale, heads) +
                              oracle_branch(q, {&base, &style}, scale, heads) +
                              oracle_branch(q, {&base, &content}, scale, heads) +
                              oracle_branch(q, {&base, &style, &content}, scale, heads)) /
                             4.0;
    compose_err = std::max(compose_err, (co.output - co_oracle).cwiseAbs().maxCoeff());
    compose_branches = co.branches.size();

    for (const auto& cat : {afa::concat_tokens({base, prompt}), afa::concat_tokens({base, style}),
                            afa::concat_tokens({base, prompt, style}),
                            afa::concat_tokens({base, content}),
                            afa::concat_tokens({base, style, content})}) {
      const Matrix w = afa::softmax_weights(q, cat.keys, scale);
      row_sum = std::max(row_sum, (w.rowwise().sum().array() - 1.0).abs().maxCoeff());

      const Matrix out = afa::attention(q, cat, scale);
      const Eigen::RowVectorXd lo = cat.values.colwise().minCoeff();
      const Eigen::RowVectorXd hi = cat.values.colwise().maxCoeff();
      for (Eigen::Index i = 0; i < out.rows(); ++i) {
        hull = std::max(hull, (lo - out.row(i)).maxCoeff());
        hull = std::max(hull, (out.row(i) - hi).maxCoeff());
      }

      std::vector<int> order(static_cast<std::size_t>(cat.tokens()));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      afa::AttentionBranch shuffled{Matrix(cat.keys.rows(), cat.keys.cols()),
                                    Matrix(cat.values.rows(), cat.values.cols())};
      for (std::size_t i = 0; i < order.size(); ++i) {
        shuffled.keys.row(static_cast<Eigen::Index>(i)) = cat.keys.row(order[i]);
        shuffled.values.row(static_cast<Eigen::Index>(i)) = cat.values.row(order[i]);
      }
      perm = std::max(perm, (afa::attention(q, shuffled, scale, heads) -
                             afa::attention(q, cat, scale, heads))
                                .cwiseAbs()
                                .maxCoeff());
    }

    const Matrix single = afa::attention(q, afa::concat_tokens({base, prompt}), scale, heads);
    const Matrix doubled =
        afa::attention(q, afa::concat_tokens({base, prompt, prompt}), scale, heads);
    duplicate_gap = std::min(duplicate_gap, (single - doubled).cwiseAbs().maxCoeff());
  }

  const std::string n = " (" + std::to_string(spec.instances) + " random instances)";
  r.add(check_at_most("afa_stylize vs brute-force softmax oracle, max abs error" + n, stylize_err,
                      1e-12));
  r.add(check_at_most("afa_compose vs brute-force softmax oracle, max abs error" + n, compose_err,
                      1e-12));
  r.add(check_at_most("softmax row sums max |sum - 1|" + n, row_sum, 1e-12));
  r.add(check_at_most("attention output convex-hull bound violation" + n, hull, 1e-12));
  r.add(check_at_most("token-permutation invariance max abs difference" + n, perm, 1e-12));
  r.add(check_equal("afa_stylize averaged branch count", static_cast<double>(stylize_branches), 3));
  r.add(check_equal("afa_compose averaged branch count", static_cast<double>(compose_branches), 4));
  r.add(check_at_most("afa_stylize output equals the mean of its branches", mean_err, 1e-15));
  r.add(check_greater("duplicated prompt tokens change attention (min max-abs change)",
                      duplicate_gap, 1e-9));

  // Two keys with logits ln 3 and 0 -> weights (3/4, 1/4).
  Matrix q(1, 1), k(2, 1), v(2, 2);
  q << 1.0;
  k << std::log(3.0), 0.0;
  v << 1.0, 0.0, 0.0, 1.0;
  Vector expected(2);
  expected << 0.75, 0.25;
  r.add(check_at_most("softmax(ln 3, 0) attention example",
                      (afa::attention(q, k, v, 1.0).row(0).transpose() - expected).norm(), 1e-15));
}

void posterior_means(RunReport& r, std::uint64_t seed) {
  using namespace diffusion;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto s50 = NoiseSchedule::make(50);

  // Tweedie on a Gaussian prior, every step of the schedule.
  Vector mu(2);
  mu << 0.5, -1.0;
  const IsotropicGaussianScore gauss(mu, 2.0, variance_preserving(s50));
  double tweedie_err = 0.0;
  for (int t = 0; t <= 50; ++t) {
    const double a = s50.alpha_bar(t);
    for (int i = 0; i < 20; ++i) {
      const Vector x = random_vector(rng, 2, 2.0);
      const Vector expect = oracle::gaussian_posterior_mean(mu, 2.0, std::sqrt(a), std::sqrt(1 - a), x);
      tweedie_err = std::max(tweedie_err, (tweedie_posterior_mean(x, t, gauss, s50) - expect).norm());
    }
  }
  r.add(check_at_most("Tweedie posterior mean vs Gaussian conditional mean", tweedie_err, 1e-10));

  // Mixture posterior means against quadrature.
  const oracle::Mixture1d prior{{0.5, 0.5}, {-2.0, 2.0}, {0.25, 0.25}};
  const auto half = NoiseSchedule::from_alpha_bar({1.0, 0.5});
  const auto mixture_on = [&](std::shared_ptr<const MarginalPath> path) {
    return GaussianMixtureScore({0.5, 0.5}, {Vector::Constant(1, -2.0), Vector::Constant(1, 2.0)},
                                {0.25, 0.25}, std::move(path));
  };
  const auto vp_mix = mixture_on(variance_preserving(half));
  const auto flow_mix = mixture_on(flow_path());
  double vp_err = 0.0, flow_err = 0.0;
  for (double x : {-3.0, -1.2, 0.0, 0.3, 0.9, 2.5}) {
    const Vector xv = Vector::Constant(1, x);
    vp_err = std::max(vp_err, std::abs(tweedie_posterior_mean(xv, 1, vp_mix, half)[0] -
                                       oracle::posterior_mean_quadrature(prior, std::sqrt(0.5),
                                                                         std::sqrt(0.5), x)));
    flow_err = std::max(flow_err, std::abs(flow_posterior_mean(xv, 0.5, flow_mix)[0] -
                                           oracle::posterior_mean_quadrature(prior, 0.5, 0.5, x)));
  }
  r.add(check_at_most("mixture Tweedie mean vs quadrature (abar=0.5)", vp_err, 1e-6));
  r.add(check_at_most("mixture flow posterior mean vs quadrature (t=0.5)", flow_err, 1e-6));

  // Flow posterior mean on a unit Gaussian.
  const IsotropicGaussianScore unit_flow(Vector::Zero(2), 1.0, flow_path());
  double flow_gauss = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double t = 0.95 * unit(rng);
    const Vector x = random_vector(rng, 2, 2.0);
    const Vector expect = (1 - t) * x / ((1 - t) * (1 - t) + t * t);
    flow_gauss = std::max(flow_gauss, (flow_posterior_mean(x, t, unit_flow) - expect).norm());
  }
  r.add(check_at_most("flow posterior mean vs Gaussian conditional mean", flow_gauss, 1e-10));

  // Flow-remark drift identity.
  const GaussianMixtureScore mix2({0.3, 0.7}, {Vector::Constant(2, -1.0), Vector::Constant(2, 1.5)},
                                  {0.5, 0.2}, flow_path());
  double identity = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector x = random_vector(rng, 2, 1.5);
    const Vector lhs = reverse_drift(x, 0.5, mix2, rbm::diffusion::DriftMode::FlowRemark);
    const Vector rhs = (flow_posterior_mean(x, 0.5, mix2) - x) / 0.5;
    identity = std::max(identity, (lhs - rhs).lpNorm<Eigen::Infinity>());
  }
  r.add(check_at_most("flow-remark drift identity at 100 random points", identity, 1e-12));
}

void diffusion_core(RunReport& r, std::uint64_t seed) {
  using namespace diffusion;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Schedules against direct cumulative products.
  const auto s1000 = NoiseSchedule::make(1000);
  const auto s50 = NoiseSchedule::make(50);
  double sched_err = 0.0;
  for (int t = 0; t <= 1000; ++t) {
    sched_err = std::max(sched_err, std::abs(s1000.alpha_bar(t) - oracle::linear_beta_alpha_bar(1000, t)));
  }
  for (int t = 0; t <= 50; ++t) {
    sched_err = std::max(sched_err, std::abs(s50.alpha_bar(t) - oracle::linear_beta_alpha_bar(1000, 20 * t)));
  }
  r.add(check_at_most("linear-beta alpha_bar vs cumulative-product oracle", sched_err, 1e-12));

  posterior_means(r, seed);

  Vector mu(2);
  mu << 0.5, -1.0;
  const IsotropicGaussianScore gauss(mu, 2.0, variance_preserving(s50));

  // Score vs finite differences of the log-density.
  const GaussianMixtureScore vp_mix2({0.3, 0.7}, {Vector::Constant(2, -1.0), Vector::Constant(2, 1.5)},
                                     {0.5, 0.2}, variance_preserving(s50));
  double consistency = 0.0;
  for (const AnalyticScoreModel* m : {static_cast<const AnalyticScoreModel*>(&gauss),
                                      static_cast<const AnalyticScoreModel*>(&vp_mix2)}) {
    for (int i = 0; i < 1000; ++i) {
      const double t = unit(rng);
      const Vector x = random_vector(rng, 2, 2.0);
      const Vector fd = central_difference_gradient(
          [&](const Vector& p) { return m->log_density(p, t); }, x, 0.0, 1e-5);
      const Vector s = m->score(x, t);
      consistency = std::max(consistency, (fd - s).norm() / std::max(s.norm(), 1.0));
    }
  }
  r.add(check_at_most("score vs log-density finite differences, max relative error", consistency,
                      1e-5));

  // DDIM determinism.
  const Vector xt = random_vector(rng, 3), x0 = random_vector(rng, 3);
  const bool same = bitwise_equal(ddim_step(xt, x0, 30, 29, s50).values,
                                  ddim_step(xt, x0, 30, 29, s50).values);
  r.add(check_equal("DDIM step bitwise mismatches on repeated input", same ? 0.0 : 1.0, 0.0));

  // Marginal preservation: the unit Gaussian score factorizes, so one run in
  // dimension 2n yields n independent 2-D samples.
  const int n = 100000;
  const auto s1000_path = variance_preserving(s1000);
  const IsotropicGaussianScore unit_vp(Vector::Zero(2 * n), 1.0, s1000_path);
  sampling::SamplerConfig cfg;
  cfg.num_steps = 1000;
  cfg.seed = seed;
  const Vector end = sampling::sample_uncontrolled(cfg, unit_vp, s1000).trajectory.final_state().values;
  const Eigen::Map<const Matrix> samples(end.data(), 2, n);
  const Vector mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / (n - 1);
  double worst = std::max(std::abs(mean[0]), std::abs(mean[1])) / (3.0 / std::sqrt(n));
  worst = std::max(worst, std::abs(cov(0, 0) - 1.0) / (3.0 * std::sqrt(2.0 / n)));
  worst = std::max(worst, std::abs(cov(1, 1) - 1.0) / (3.0 * std::sqrt(2.0 / n)));
  worst = std::max(worst, std::abs(cov(0, 1)) / (3.0 / std::sqrt(n)));
  r.add(check_at_most("uncontrolled DDIM (T=1000) from N(0,I): mean/cov offset in units of 3 sigma",
                      worst, 1.0));
}

void style_features(RunReport& r, std::uint64_t seed) {
  using namespace style;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto linear = std::make_shared<LinearExtractor>(random_matrix(rng, 3, 4));
  auto quadratic = std::make_shared<QuadraticExtractor>(4);
  const TerminalCost lin_cost(linear, random_vector(rng, 3));
  const TerminalCost quad_cost(quadratic, random_vector(rng, 4).cwiseAbs());

  const auto fd = [](const TerminalCost& c, const Vector& x) {
    Vector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Vector up = x, down = x;
      up[i] += h;
      down[i] -= h;
      g[i] = (c.value(up) - c.value(down)) / (2 * h);
    }
    return g;
  };
  double lin_err = 0.0, quad_err = 0.0, convex = -1e300, linearity = 0.0, scale_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vector x = random_vector(rng, 4, 2.0), y = random_vector(rng, 4, 2.0);
    const Vector gl = fd(lin_cost, x), gq = fd(quad_cost, x);
    lin_err = std::max(lin_err, (lin_cost.gradient(x) - gl).norm() / std::max(gl.norm(), 1e-8));
    quad_err = std::max(quad_err, (quad_cost.gradient(x) - gq).norm() / std::max(gq.norm(), 1e-8));

    const double lam = unit(rng);
    convex = std::max(convex, lin_cost.value(lam * x + (1 - lam) * y) -
                                  (lam * lin_cost.value(x) + (1 - lam) * lin_cost.value(y)));
    const double a = 4 * unit(rng) - 2, b = 4 * unit(rng) - 2;
    linearity = std::max(linearity, (linear->evaluate(a * x + b * y) -
                                     (a * linear->evaluate(x) + b * linear->evaluate(y)))
                                        .lpNorm<Eigen::Infinity>());
    const double c = 0.5 + 2.5 * unit(rng);
    const TerminalCost scaled(std::make_shared<LinearExtractor>(c * linear->matrix()),
                              c * lin_cost.reference());
    scale_err = std::max(scale_err, std::abs(scaled.value(x) - c * c * lin_cost.value(x)) /
                                        std::max(1.0, c * c * lin_cost.value(x)));
  }
  r.add(check_at_most("linear terminal-cost gradient vs finite differences, max relative error",
                      lin_err, 1e-6));
  r.add(check_at_most("quadratic terminal-cost gradient vs finite differences, max relative error",
                      quad_err, 1e-4));
  r.add(check_at_most("linear cost convexity along lines, max violation", convex, 1e-10));
  r.add(check_at_most("linear extractor superposition error", linearity, 1e-12));
  r.add(check_at_most("scale covariance |cost(cA, c ref) - c^2 cost|, relative", scale_err, 1e-12));

  const TerminalCost unit_offset(std::make_shared<LinearExtractor>(Matrix::Identity(2, 2)),
                                 Vector::Unit(2, 0));
  r.add(check_equal("identity extractor, reference (1,0), x=0: cost", unit_offset.value(Vector::Zero(2)), 1.0));
  r.add(check_at_most("identity extractor, reference (1,0), x=0: gradient vs (-2,0)",
                      (unit_offset.gradient(Vector::Zero(2)) - Vector::Unit(2, 0) * -2.0).norm(), 0.0));
}

namespace {

class ResetProbe final : public sampling::SamplerObserver {
 public:
  void on_control_init(int, const Vector& u) override {
    ++inits;
    if (u.size() == 0 || u.cwiseAbs().maxCoeff() != 0.0) ++nonzero;
  }
  long inits = 0;
  long nonzero = 0;
};

long state_mismatches(const std::vector<SeedRun>& runs) {
  long bad = 0;
  for (const auto& run : runs) {
    const auto& a = run.controlled.trajectory.states;
    const auto& b = run.baseline.trajectory.states;
    if (a.size() != b.size()) return -1;
    for (std::size_t i = 0; i < a.size(); ++i) bad += bitwise_equal(a[i].values, b[i].values) ? 0 : 1;
  }
  return bad;
}

double max_state_gap(const std::vector<SeedRun>& runs) {
  double gap = 0.0;
  for (const auto& run : runs) {
    const auto& a = run.controlled.trajectory.states;
    const auto& b = run.baseline.trajectory.states;
    for (std::size_t i = 0; i < a.size(); ++i) {
      gap = std::max(gap, (a[i].values - b[i].values).lpNorm<Eigen::Infinity>());
    }
  }
  return gap;
}

}  // namespace

namespace {

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  std::iota(seeds.begin(), seeds.end(), first);
  return seeds;
}

/// The operating point eta = 0.1, M = 3, T = 50 (lambda = 1 for Algorithm 2).
sampling::SamplerConfig operating_point() {
  sampling::SamplerConfig cfg;
  cfg.num_steps = 50;
  cfg.step_size = 0.1;
  cfg.opt_steps = 3;
  cfg.proximal_strength = 1.0;
  return cfg;
}

std::string seeds_tag(int num_seeds) { return " (" + std::to_string(num_seeds) + " seeds)"; }

}  // namespace

void algorithm1_benchmark(RunReport& r, std::uint64_t seed, int num_seeds, int threads) {
  using sampling::SamplerConfig;
  const auto seeds = seed_range(seed, num_seeds);
  const SamplerConfig cfg = operating_point();
  const auto bench = gaussian_linear_benchmark(50, 2.0);
  const std::string n = seeds_tag(num_seeds);

  const auto a1 = run_seeds(Algorithm::Alg1, cfg, bench, seeds, threads);
  double mean_feature = 0.0;
  for (const auto& run : a1) mean_feature += run.controlled.trajectory.final_state().values[0];
  mean_feature /= num_seeds;
  const double unc_cost = mean_terminal_cost(a1, true);
  const double a1_cost = mean_terminal_cost(a1, false);
  r.metrics.emplace_back("uncontrolled_mean_terminal_cost", unc_cost);
  r.metrics.emplace_back("alg1_mean_terminal_cost", a1_cost);
  r.add(check_near("alg1 mean Psi(X_0), reference 2" + n, mean_feature, 2.0, 0.1));
  r.add(check_less("alg1 mean terminal cost / uncontrolled" + n, a1_cost / unc_cost, 0.2));

  SamplerConfig m0 = cfg;
  m0.opt_steps = 0;
  const long mismatches = state_mismatches(run_seeds(Algorithm::Alg1, m0, bench, seeds, threads));
  r.add(check_equal("alg1 M=0 vs uncontrolled DDIM, bitwise state mismatches" + n,
                    static_cast<double>(mismatches), 0.0));
}

void algorithm2_benchmark(RunReport& r, std::uint64_t seed, int num_seeds, int threads) {
  using sampling::SamplerConfig;
  const auto seeds = seed_range(seed, num_seeds);
  const SamplerConfig cfg = operating_point();
  const auto bench = gaussian_linear_benchmark(50, 2.0);
  const std::string n = seeds_tag(num_seeds);

  const auto a1 = run_seeds(Algorithm::Alg1, cfg, bench, seeds, threads);
  const auto a2 = run_seeds(Algorithm::Alg2, cfg, bench, seeds, threads);
  long grad_evals = 0;
  for (const auto& run : a2) grad_evals += run.controlled.counters.score_gradient_evaluations;
  SamplerConfig one = cfg;
  one.seed = seed;
  auto counting = std::make_shared<diffusion::CountingScore>(bench.score);
  (void)sampling::run_algorithm2(one, *counting, *bench.cost, bench.schedule);
  r.add(check_equal("alg2 score-gradient evaluations" + n, static_cast<double>(grad_evals), 0.0));
  r.add(check_equal("alg2 score-Jacobian calls seen by a counting wrapper",
                    static_cast<double>(counting->jacobian_calls()), 0.0));

  const double unc_cost = mean_terminal_cost(a1, true);
  const double a1_cost = mean_terminal_cost(a1, false);
  const double a2_cost = mean_terminal_cost(a2, false);
  r.metrics.emplace_back("alg2_mean_terminal_cost", a2_cost);
  r.metrics.emplace_back("alg2_over_alg1_terminal_cost_ratio", a2_cost / a1_cost);
  r.add(check_at_most("alg1 mean terminal cost / uncontrolled, paired with alg2" + n,
                      a1_cost / unc_cost, 0.2));
  r.add(check_at_most("alg2 mean terminal cost / uncontrolled" + n, a2_cost / unc_cost, 0.2));
  const double ratio = mean_feature_error(a2, false) / mean_feature_error(a1, false);
  r.add(check_at_most("alg2 / alg1 mean terminal feature error on matched seeds" + n, ratio, 2.0));

  SamplerConfig stiff = cfg;
  stiff.proximal_strength = 1e8;
  stiff.opt_steps = 1;
  r.add(check_at_most("alg2 lambda=1e8, M=1: max state deviation from uncontrolled" + n,
                      max_state_gap(run_seeds(Algorithm::Alg2, stiff, bench, seeds, threads)), 1e-4));

  std::mt19937_64 rng(seed);
  SamplerConfig ridge = cfg;
  ridge.opt_steps = 500;
  ridge.step_size = 0.05;
  ridge.proximal_strength = 1.0;
  double ridge_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Matrix a = i == 0 ? Matrix(Eigen::RowVector2d(1.0, 0.0)) : random_matrix(rng, 2, 3);
    const Vector ref = random_vector(rng, a.rows());
    const Vector bar = random_vector(rng, a.cols());
    const style::TerminalCost c(std::make_shared<style::LinearExtractor>(a), ref);
    ridge_err = std::max(ridge_err, (sampling::proximal_x0_solve(bar, c, ridge) -
                                     oracle::ridge_solution(a, ref, 1.0, bar))
                                        .norm());
  }
  r.add(check_at_most("proximal solve vs ridge oracle (lambda=1, M=500, eta=0.05)", ridge_err, 1e-6));
}

void soc_sampler(RunReport& r, std::uint64_t seed, int num_seeds, int threads) {
  using sampling::SamplerConfig;
  algorithm1_benchmark(r, seed, num_seeds, threads);
  algorithm2_benchmark(r, seed, num_seeds, threads);

  const auto seeds = seed_range(seed, num_seeds);
  const SamplerConfig cfg = operating_point();
  const auto bench = gaussian_linear_benchmark(50, 2.0);
  const std::string n = seeds_tag(num_seeds);
  const auto a1 = run_seeds(Algorithm::Alg1, cfg, bench, seeds, threads);
  const auto a2 = run_seeds(Algorithm::Alg2, cfg, bench, seeds, threads);

  // Per-step cost record should not rise in expectation: one-sided paired
  // test per step, z = mean increase / standard error over seeds. 3.5 keeps
  // the family-wise false-alarm rate near 1% across 50 steps.
  const auto z = cost_rise_zscores(a1);
  Table record{"alg1_cost_record.csv", {"record_index", "mean_cost", "rise_zscore"}, {}};
  const auto curve = mean_cost_record(a1);
  for (std::size_t k = 0; k < curve.size(); ++k) {
    record.rows.push_back({static_cast<double>(k), curve[k], k == 0 ? 0.0 : z[k - 1]});
  }
  r.tables.push_back(std::move(record));
  r.add(check_at_most("alg1 per-step cost record rise, max paired z-score over steps" + n,
                      *std::max_element(z.begin(), z.end()), 3.5));
  {
    SamplerConfig m1 = cfg;
    m1.opt_steps = 1;
    const auto z1 = cost_rise_zscores(run_seeds(Algorithm::Alg1, m1, bench, seeds, threads));
    r.metrics.emplace_back("alg1_m1_max_cost_rise_zscore", *std::max_element(z1.begin(), z1.end()));
  }

  const auto at_mean = gaussian_linear_benchmark(50, 0.0);
  const auto a1_mean = run_seeds(Algorithm::Alg1, cfg, at_mean, seeds, threads);
  int wins = 0;
  for (const auto& run : a1_mean) {
    wins += run.controlled.trajectory.costs.back() <= run.baseline.trajectory.costs.back() ? 1 : 0;
  }
  r.add(check_at_least("alg1 reference at prior mean: fraction of seeds with cost <= uncontrolled" + n,
                       static_cast<double>(wins) / num_seeds, 0.95));

  ResetProbe probe;
  SamplerConfig one = cfg;
  one.seed = seed;
  (void)sampling::run_algorithm1(one, *bench.score, *bench.cost, bench.schedule, {}, &probe);
  r.add(check_equal("alg1 controller re-initialized to zero each step: nonzero inits",
                    static_cast<double>(probe.nonzero), 0.0));
  r.add(check_equal("alg1 controller initializations per run", static_cast<double>(probe.inits), 50.0));

  // Gradient modes agree.
  std::mt19937_64 rng(seed + 1);
  double mode_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Vector x = random_vector(rng, 2), u = random_vector(rng, 2, 0.3);
    const int t = 1 + i % 50;
    const Vector ga = sampling::control_gradient(x, u, t, *bench.score, *bench.cost, bench.schedule,
                                                 sampling::GradientMode::Analytic);
    const Vector gf = sampling::control_gradient(x, u, t, *bench.score, *bench.cost, bench.schedule,
                                                 sampling::GradientMode::FiniteDifference);
    mode_gap = std::max(mode_gap, (ga - gf).norm() / std::max(ga.norm(), 1e-12));
  }
  r.add(check_at_most("analytic vs finite-difference control gradient, max relative gap", mode_gap,
                      1e-4));

  // Inner loop fixed point vs direct least squares.
  SamplerConfig ls = cfg;
  ls.opt_steps = 500;
  ls.step_size = 0.05;
  double ls_err = 0.0;
  for (int i = 0; i < 10; ++i) {
    const int t = 5;
    const Vector x = random_vector(rng, 2);
    const double s = std::sqrt(bench.schedule.alpha_bar(t));
    const auto step = sampling::optimize_control_step({x, t}, *bench.score, *bench.cost,
                                                      bench.schedule, ls);
    const Matrix a = Eigen::RowVector2d(1.0, 0.0);
    const Vector u_star = pseudo_inverse(s * a) * (bench.cost->reference() - s * a * x);
    ls_err = std::max(ls_err, (step.control - u_star).norm());
  }
  r.add(check_at_most("alg1 inner loop (M=500, eta=0.05) vs least-squares minimizer", ls_err, 1e-6));

  // Determinism.
  const auto again1 = sampling::run_algorithm1(one, *bench.score, *bench.cost, bench.schedule);
  const auto again2 = sampling::run_algorithm2(one, *bench.score, *bench.cost, bench.schedule);
  long diff = 0;
  for (std::size_t i = 0; i < again1.trajectory.states.size(); ++i) {
    diff += bitwise_equal(again1.trajectory.states[i].values, a1.front().controlled.trajectory.states[i].values) ? 0 : 1;
    diff += bitwise_equal(again2.trajectory.states[i].values, a2.front().controlled.trajectory.states[i].values) ? 0 : 1;
  }
  r.add(check_equal("repeat runs with the same seed: bitwise state mismatches", static_cast<double>(diff), 0.0));
}

}  // namespace socdiffuse::checks
