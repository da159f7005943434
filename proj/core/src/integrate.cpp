#include "phmbd/integrate.hpp"

#include <cmath>
#include <limits>

namespace phmbd {

std::string to_string(Scheme s) { return s == Scheme::Midpoint ? "mp" : "mp-ggl"; }

Scheme scheme_from_string(const std::string& name) {
  if (name == "mp" || name == "PH-MP") return Scheme::Midpoint;
  if (name == "mp-ggl" || name == "PH-MP-GGL") return Scheme::MidpointGGL;
  throw ConfigurationError("unknown integrator '" + name + "' (expected mp or mp-ggl)");
}

int unknown_count(const MultibodySystem& sys, Scheme s) {
  return 2 * sys.n() + (s == Scheme::Midpoint ? 1 : 2) * sys.m();
}

namespace {

struct Midpoint {
  Vec q1, v1, lambda, gamma;
  Vec qm, vm;
  double tm = 0.0;
};

Midpoint unpack(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h, bool ggl) {
  const int n = sys.n(), m = sys.m();
  Midpoint p;
  p.q1 = y.segment(0, n);
  p.v1 = y.segment(n, n);
  p.lambda = y.segment(2 * n, m);
  p.gamma = ggl ? Vec(y.segment(2 * n + m, m)) : Vec::Zero(m);
  p.qm = 0.5 * (s0.q + p.q1);
  p.vm = 0.5 * (s0.v + p.v1);
  p.tm = s0.t + 0.5 * h;
  return p;
}

}  // namespace

Vec midpoint_residual(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h) {
  const int n = sys.n(), m = sys.m();
  const Midpoint p = unpack(sys, s0, y, h, false);
  const Mat G = sys.constraint_jacobian(p.qm);
  Vec r(2 * n + m);
  r.segment(0, n) = p.q1 - s0.q - h * p.vm;
  Vec mom = sys.mass_diagonal().cwiseProduct(p.v1 - s0.v) + h * sys.potential_gradient() +
            h * (G.transpose() * p.lambda);
  if (sys.has_loads()) mom -= h * sys.input_assembly(p.qm, p.tm);
  r.segment(n, n) = mom;
  r.segment(2 * n, m) = h * (G * p.vm);
  return r;
}

Mat midpoint_jacobian(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h) {
  const int n = sys.n(), m = sys.m();
  const Midpoint p = unpack(sys, s0, y, h, false);
  const Mat G = sys.constraint_jacobian(p.qm);
  Mat J = Mat::Zero(2 * n + m, 2 * n + m);
  J.block(0, 0, n, n).setIdentity();
  J.block(0, n, n, n) = -0.5 * h * Mat::Identity(n, n);
  Mat dq = sys.constraint_hessian(p.lambda);
  if (sys.has_loads()) dq -= sys.input_derivative(p.qm, p.tm);
  J.block(n, 0, n, n) = 0.5 * h * dq;
  J.block(n, n, n, n) = sys.mass_diagonal().asDiagonal();
  J.block(n, 2 * n, n, m) = h * G.transpose();
  J.block(2 * n, 0, m, n) = 0.5 * h * sys.velocity_jacobian_derivative(p.vm);
  J.block(2 * n, n, m, n) = 0.5 * h * G;
  return J;
}

Vec ggl_residual(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h) {
  const int n = sys.n(), m = sys.m();
  const Midpoint p = unpack(sys, s0, y, h, true);
  const Mat G = sys.constraint_jacobian(p.qm);
  const Mat K = sys.velocity_jacobian_derivative(p.vm);
  const Vec& minv = sys.inverse_mass_diagonal();
  const Vec w = minv.cwiseProduct(G.transpose() * p.gamma);
  Vec force = -sys.potential_gradient() - G.transpose() * p.lambda - K.transpose() * p.gamma;
  if (sys.has_loads()) force += sys.input_assembly(p.qm, p.tm);
  const Vec a = minv.cwiseProduct(force);

  Vec r(2 * n + 2 * m);
  r.segment(0, n) = p.q1 - s0.q - h * p.vm - h * w;
  r.segment(n, n) = sys.mass_diagonal().cwiseProduct(p.v1 - s0.v) - h * force;
  r.segment(2 * n, m) = h * (G * (p.vm + w));
  r.segment(2 * n + m, m) = h * (G * a + K * (p.vm + w));
  return r;
}

Mat ggl_jacobian(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h) {
  const int n = sys.n(), m = sys.m();
  const Midpoint p = unpack(sys, s0, y, h, true);
  const Mat G = sys.constraint_jacobian(p.qm);
  const Mat K = sys.velocity_jacobian_derivative(p.vm);
  const Vec& minv = sys.inverse_mass_diagonal();
  const auto Minv = minv.asDiagonal();
  const Vec w = minv.cwiseProduct(G.transpose() * p.gamma);
  Vec force = -sys.potential_gradient() - G.transpose() * p.lambda - K.transpose() * p.gamma;
  Mat D = Mat::Zero(n, n);
  if (sys.has_loads()) {
    force += sys.input_assembly(p.qm, p.tm);
    D = sys.input_derivative(p.qm, p.tm);
  }
  const Vec a = minv.cwiseProduct(force);
  const Mat Hl = sys.constraint_hessian(p.lambda);
  const Mat Hg = sys.constraint_hessian(p.gamma);
  const Mat Kw = sys.velocity_jacobian_derivative(w);
  const Mat Ka = sys.velocity_jacobian_derivative(a);
  const Mat MinvGt = Minv * G.transpose();
  const Mat GMinv = G * Minv;
  const Mat GMinvGt = G * MinvGt;
  const Mat MinvHg = Minv * Hg;

  const int iq = 0, iv = n, il = 2 * n, ig = 2 * n + m;
  Mat J = Mat::Zero(2 * n + 2 * m, 2 * n + 2 * m);
  J.block(iq, iq, n, n) = Mat::Identity(n, n) - 0.5 * h * MinvHg;
  J.block(iq, iv, n, n) = -0.5 * h * Mat::Identity(n, n);
  J.block(iq, ig, n, m) = -h * MinvGt;

  J.block(iv, iq, n, n) = 0.5 * h * (Hl - D);
  J.block(iv, iv, n, n) = Mat(sys.mass_diagonal().asDiagonal()) + 0.5 * h * Hg;
  J.block(iv, il, n, m) = h * G.transpose();
  J.block(iv, ig, n, m) = h * K.transpose();

  J.block(il, iq, m, n) = 0.5 * h * (K + Kw + G * MinvHg);
  J.block(il, iv, m, n) = 0.5 * h * G;
  J.block(il, ig, m, m) = h * GMinvGt;

  J.block(ig, iq, m, n) = 0.5 * h * (Ka + GMinv * (D - Hl) + K * MinvHg);
  J.block(ig, iv, m, n) = 0.5 * h * (-G * MinvHg + 2.0 * K + Kw);
  J.block(ig, il, m, m) = -h * GMinvGt;
  const Mat KMinvGt = K * MinvGt;
  J.block(ig, ig, m, m) = h * (KMinvGt - KMinvGt.transpose());
  return J;
}

Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  Vec xp = x;
  for (int j = 0; j < x.size(); ++j) {
    const double dx = step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + dx;
    const Vec fp = f(xp);
    xp[j] = x[j] - dx;
    const Vec fm = f(xp);
    xp[j] = x[j];
    J.col(j) = (fp - fm) / (2.0 * dx);
  }
  return J;
}

NewtonReport newton_solve(const std::function<Vec(const Vec&)>& residual,
                          const std::function<Mat(const Vec&)>& jacobian, const Vec& guess,
                          double tol, int max_iter) {
  NewtonReport rep;
  rep.x = guess;
  Vec r = residual(rep.x);
  rep.residual_norm = r.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(rep.residual_norm)) {
    rep.reason = "non-finite residual";
    return rep;
  }
  for (int it = 1; it <= max_iter; ++it) {
    rep.iterations = it;
    const Mat J = jacobian(rep.x);
    if (!J.allFinite()) {
      rep.reason = "non-finite jacobian";
      return rep;
    }
    Eigen::PartialPivLU<Mat> lu(J);
    if (!(lu.rcond() > std::numeric_limits<double>::epsilon())) {
      rep.reason = "singular jacobian";
      return rep;
    }
    rep.x -= lu.solve(r);
    r = residual(rep.x);
    rep.residual_norm = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(rep.residual_norm)) {
      rep.reason = "non-finite residual";
      return rep;
    }
    if (rep.residual_norm <= tol) {
      rep.converged = true;
      return rep;
    }
  }
  rep.reason = "maximum iterations exceeded";
  return rep;
}

NewtonFailure::NewtonFailure(StepFailure info)
    : std::runtime_error("newton failure at step " + std::to_string(info.step) + " (t = " +
                         std::to_string(info.t) + "): " + info.reason),
      info_(std::move(info)) {}

Integrator::Integrator(const MultibodySystem& sys, IntegratorConfig config) : sys_(&sys), config_(config) {
  if (!(config_.h > 0.0)) throw ConfigurationError("time step must be positive");
  if (!(config_.newton_tol > 0.0)) throw ConfigurationError("newton tolerance must be positive");
  if (config_.newton_max_iter < 1) throw ConfigurationError("newton iteration cap must be at least 1");
}

Vec Integrator::residual(const SystemState& s0, const Vec& y) const {
  return config_.scheme == Scheme::Midpoint ? midpoint_residual(*sys_, s0, y, config_.h)
                                            : ggl_residual(*sys_, s0, y, config_.h);
}

Mat Integrator::jacobian(const SystemState& s0, const Vec& y) const {
  if (config_.jacobian_mode == JacobianMode::FiniteDifference)
    return finite_difference_jacobian([&](const Vec& x) { return residual(s0, x); }, y);
  return config_.scheme == Scheme::Midpoint ? midpoint_jacobian(*sys_, s0, y, config_.h)
                                            : ggl_jacobian(*sys_, s0, y, config_.h);
}

Vec Integrator::initial_guess(const SystemState& s, const Vec* q_prev) const {
  const int n = sys_->n(), m = sys_->m();
  Vec y(unknown_count(*sys_, config_.scheme));
  y.segment(0, n) = q_prev ? Vec(2.0 * s.q - *q_prev) : Vec(s.q + config_.h * s.v);
  y.segment(n, n) = s.v;
  y.segment(2 * n, m) = s.lambda;
  if (config_.scheme == Scheme::Midpoint) return y;

  // GGL: the multipliers swing hard near poorly conditioned configurations, so seed
  // from a converged midpoint step (gamma = 0) when one exists.
  y.segment(2 * n + m, m).setZero();
  const int k = 2 * n + m;
  const NewtonReport pred = newton_solve(
      [&](const Vec& x) { return midpoint_residual(*sys_, s, x, config_.h); },
      [&](const Vec& x) { return midpoint_jacobian(*sys_, s, x, config_.h); }, y.head(k), config_.newton_tol,
      config_.newton_max_iter);
  if (pred.converged) {
    y.head(k) = pred.x;
  } else if (s.gamma) {
    y.segment(2 * n + m, m) = *s.gamma;
  }
  return y;
}

StepResult Integrator::step(const SystemState& s, const Vec* q_prev, int step_index) const {
  const int n = sys_->n(), m = sys_->m();
  const NewtonReport rep = newton_solve([&](const Vec& y) { return residual(s, y); },
                                        [&](const Vec& y) { return jacobian(s, y); },
                                        initial_guess(s, q_prev), config_.newton_tol, config_.newton_max_iter);
  if (!rep.converged) {
    throw NewtonFailure({step_index, s.t, rep.residual_norm, rep.iterations, rep.reason});
  }
  StepResult out;
  out.iterations = rep.iterations;
  out.residual_norm = rep.residual_norm;
  out.state.t = s.t + config_.h;
  out.state.q = rep.x.segment(0, n);
  out.state.v = rep.x.segment(n, n);
  out.state.lambda = rep.x.segment(2 * n, m);
  if (config_.scheme == Scheme::MidpointGGL) out.state.gamma = rep.x.segment(2 * n + m, m);
  return out;
}

long step_count(double h, double t_end) {
  if (t_end <= 0.0) return 0;
  return std::lround(t_end / h);
}

Trajectory Integrator::simulate(const SystemState& initial) const {
  Trajectory traj;
  traj.h = config_.h;
  traj.scheme = config_.scheme;
  SystemState s0 = initial;
  if (config_.scheme == Scheme::MidpointGGL && !s0.gamma) s0.gamma = Vec::Zero(sys_->m());
  traj.states.push_back(s0);
  traj.newton_iterations.push_back(0);
  traj.residual_norms.push_back(0.0);
  const long steps = step_count(config_.h, config_.t_end);
  const double t0 = initial.t;
  for (long k = 0; k < steps; ++k) {
    const SystemState& cur = traj.states.back();
    const Vec* prev = traj.states.size() > 1 ? &traj.states[traj.states.size() - 2].q : nullptr;
    try {
      StepResult r = step(cur, prev, static_cast<int>(k));
      r.state.t = t0 + static_cast<double>(k + 1) * config_.h;
      traj.states.push_back(std::move(r.state));
      traj.newton_iterations.push_back(r.iterations);
      traj.residual_norms.push_back(r.residual_norm);
    } catch (const NewtonFailure& f) {
      traj.failure = f.info();
      break;
    }
  }
  return traj;
}

SystemState step(const MultibodySystem& sys, const SystemState& s, const IntegratorConfig& config) {
  return Integrator(sys, config).step(s).state;
}

Trajectory simulate(const MultibodySystem& sys, const SystemState& initial, const IntegratorConfig& config) {
  return Integrator(sys, config).simulate(initial);
}

}  // namespace phmbd
