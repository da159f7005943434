#include "phmbd/diagnostics.hpp"

#include <cmath>
#include <sstream>

namespace phmbd {

DiagnosticsReport conservation_report(const Trajectory& traj, const MultibodySystem& sys) {
  DiagnosticsReport r;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const SystemState& s = traj.states[k];
    r.t.push_back(s.t);
    r.H.push_back(sys.hamiltonian(s.q, s.v));
    r.L.push_back(sys.angular_momentum(s.q, s.v));
    r.max_g.push_back(sys.constraints(s.q).lpNorm<Eigen::Infinity>());
    r.max_gv.push_back((sys.constraint_jacobian(s.q) * s.v).lpNorm<Eigen::Infinity>());
    r.iterations.push_back(k < traj.newton_iterations.size() ? traj.newton_iterations[k] : 0);
  }
  if (r.H.empty()) return r;
  const double h0 = r.H.front();
  const double scale = std::abs(h0) > 0.0 ? std::abs(h0) : 1.0;
  for (size_t k = 0; k < r.H.size(); ++k) {
    r.max_relative_energy_drift = std::max(r.max_relative_energy_drift, std::abs(r.H[k] - h0) / scale);
    r.max_momentum_drift = r.max_momentum_drift.cwiseMax((r.L[k] - r.L.front()).cwiseAbs());
    r.max_constraint = std::max(r.max_constraint, r.max_g[k]);
    r.max_velocity_constraint = std::max(r.max_velocity_constraint, r.max_gv[k]);
    if (k > 0) {
      r.dH.push_back(r.H[k] - r.H[k - 1]);
      r.max_energy_increment = std::max(r.max_energy_increment, std::abs(r.dH.back()));
    }
  }
  return r;
}

std::vector<ConstraintSample> constraint_report(const Trajectory& traj, const MultibodySystem& sys) {
  std::vector<ConstraintSample> out;
  out.reserve(traj.states.size());
  for (const SystemState& s : traj.states) {
    out.push_back({sys.constraints(s.q).lpNorm<Eigen::Infinity>(),
                   (sys.constraint_jacobian(s.q) * s.v).lpNorm<Eigen::Infinity>()});
  }
  return out;
}

double step_input_energy(const MultibodySystem& sys, const SystemState& s0, const SystemState& s1, double h,
                         Scheme scheme) {
  if (!sys.has_loads()) return 0.0;
  const Vec qm = 0.5 * (s0.q + s1.q);
  const Vec vm = 0.5 * (s0.v + s1.v);
  const Vec f = sys.input_assembly(qm, s0.t + 0.5 * h);
  double p = vm.dot(f);
  if (scheme == Scheme::MidpointGGL && s1.gamma) {
    const Mat G = sys.constraint_jacobian(qm);
    p += s1.gamma->dot(G * sys.inverse_mass_diagonal().cwiseProduct(f));
  }
  return h * p;
}

Vec3 angular_momentum_increment(const MultibodySystem& sys, const SystemState& s0, const SystemState& s1,
                                double h) {
  const Vec qm = 0.5 * (s0.q + s1.q);
  const Vec f = sys.has_loads() ? sys.input_assembly(qm, s0.t + 0.5 * h) : Vec::Zero(sys.n());
  const Vec& gv = sys.potential_gradient();
  Vec3 rhs = Vec3::Zero();
  for (int k = 0; k < sys.body_count(); ++k) {
    const int o = 12 * k;
    const Vec3 phi = qm.segment<3>(o);
    rhs += -phi.cross(Vec3(gv.segment<3>(o))) + phi.cross(Vec3(f.segment<3>(o)));
    for (int i = 0; i < 3; ++i)
      rhs += Vec3(qm.segment<3>(o + 3 + 3 * i)).cross(Vec3(f.segment<3>(o + 3 + 3 * i)));
  }
  return h * rhs;
}

namespace {

size_t locate(const Trajectory& traj, double tbar, double tol) {
  for (size_t k = 0; k < traj.states.size(); ++k)
    if (std::abs(traj.states[k].t - tbar) <= tol) return k;
  std::ostringstream os;
  os << "time " << tbar << " is not on the trajectory grid (h = " << traj.h << ")";
  throw AlignmentError(os.str());
}

double rms(const Vec& a, const Vec& b) {
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

ErrorSet rms_error(const Trajectory& traj, const Trajectory& ref, double tbar, const MultibodySystem& sys) {
  const double tol = 1e-6 * std::min(traj.h, ref.h);
  const SystemState& a = traj.states[locate(traj, tbar, tol)];
  const SystemState& b = ref.states[locate(ref, tbar, tol)];
  ErrorSet e;
  e.q = rms(a.q, b.q);
  e.v = rms(a.v, b.v);
  e.lambda = rms(a.lambda, b.lambda);
  e.H = std::abs(sys.hamiltonian(a.q, a.v) - sys.hamiltonian(b.q, b.v));
  e.L = rms(sys.angular_momentum(a.q, a.v), sys.angular_momentum(b.q, b.v));
  return e;
}

SlopeFit convergence_order(const std::vector<double>& h, const std::vector<double>& e) {
  SlopeFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < h.size() && i < e.size(); ++i) {
    if (!(e[i] > 0.0) || !(h[i] > 0.0)) {
      fit.excluded.push_back(static_cast<int>(i));
      continue;
    }
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.points;
  }
  const double n = fit.points;
  const double den = n * sxx - sx * sx;
  fit.slope = (fit.points >= 2 && den != 0.0) ? (n * sxy - sx * sy) / den : std::nan("");
  return fit;
}

ConvergenceOrders convergence_orders(const std::vector<double>& h, const std::vector<ErrorSet>& errors) {
  auto col = [&](double ErrorSet::*field) {
    std::vector<double> v;
    for (const ErrorSet& e : errors) v.push_back(e.*field);
    return convergence_order(h, v);
  };
  return {col(&ErrorSet::q), col(&ErrorSet::v), col(&ErrorSet::lambda), col(&ErrorSet::H), col(&ErrorSet::L)};
}

}  // namespace phmbd
