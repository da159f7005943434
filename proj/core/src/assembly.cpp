#include "phmbd/assembly.hpp"

#include <Eigen/SVD>

namespace phmbd {

MultibodySystem::MultibodySystem(std::vector<RigidBody> bodies, std::vector<CompiledJoint> joints,
                                 std::vector<BodyLoad> loads)
    : bodies_(std::move(bodies)), joints_(std::move(joints)), loads_(std::move(loads)) {
  m_ = internal_count();
  for (const CompiledJoint& j : joints_) {
    joint_offsets_.push_back(m_);
    m_ += j.size();
  }
  mass_.resize(n());
  grad_v_ = Vec::Zero(n());
  for (int k = 0; k < body_count(); ++k) {
    const RigidBody& b = bodies_[static_cast<size_t>(k)];
    mass_.segment<12>(12 * k) = phmbd::mass_diagonal(b);
    grad_v_.segment<3>(12 * k) = -b.mass * b.gravity;
  }
  inv_mass_ = mass_.cwiseInverse();
  for (const BodyLoad& l : loads_) {
    if (l.body < 0 || l.body >= body_count()) throw ConfigurationError("load applied to unknown body");
  }
}

Vec MultibodySystem::constraints(const Vec& q) const {
  Vec g(m_);
  for (int k = 0; k < body_count(); ++k) g.segment<6>(6 * k) = internal_constraints(body_block(q, k));
  for (size_t j = 0; j < joints_.size(); ++j) {
    const CompiledJoint& jt = joints_[j];
    g.segment(joint_offsets_[j], jt.size()) = jt.residual(body_block(q, jt.body_a()), body_block(q, jt.body_b()));
  }
  return g;
}

Mat MultibodySystem::constraint_jacobian(const Vec& q) const {
  Mat G = Mat::Zero(m_, n());
  for (int k = 0; k < body_count(); ++k)
    G.block<6, 12>(6 * k, 12 * k) = internal_constraint_gradient(body_block(q, k));
  for (size_t j = 0; j < joints_.size(); ++j) {
    const CompiledJoint& jt = joints_[j];
    const Mat Jj = jt.jacobian(body_block(q, jt.body_a()), body_block(q, jt.body_b()));
    const int r = joint_offsets_[j];
    G.block(r, 12 * jt.body_a(), jt.size(), 12) += Jj.leftCols<12>();
    if (!jt.grounded()) G.block(r, 12 * jt.body_b(), jt.size(), 12) += Jj.rightCols<12>();
  }
  return G;
}

Mat MultibodySystem::velocity_jacobian_derivative(const Vec& w) const {
  Mat K = Mat::Zero(m_, n());
  // internal constraints are homogeneous quadratics: K(w) = G_d(w)
  for (int k = 0; k < body_count(); ++k)
    K.block<6, 12>(6 * k, 12 * k) = internal_constraint_gradient(body_block(w, k));
  for (size_t j = 0; j < joints_.size(); ++j) {
    const CompiledJoint& jt = joints_[j];
    Eigen::Matrix<double, 24, 1> w24 = Eigen::Matrix<double, 24, 1>::Zero();
    w24.head<12>() = body_block(w, jt.body_a());
    if (!jt.grounded()) w24.tail<12>() = body_block(w, jt.body_b());
    const Mat Kj = jt.velocity_jacobian_derivative(w24);
    const int r = joint_offsets_[j];
    K.block(r, 12 * jt.body_a(), jt.size(), 12) += Kj.leftCols<12>();
    if (!jt.grounded()) K.block(r, 12 * jt.body_b(), jt.size(), 12) += Kj.rightCols<12>();
  }
  return K;
}

Mat MultibodySystem::constraint_hessian(const Vec& mu) const {
  Mat H = Mat::Zero(n(), n());
  for (int k = 0; k < body_count(); ++k)
    H.block<12, 12>(12 * k, 12 * k) = internal_constraint_hessian(mu.segment<6>(6 * k));
  for (size_t j = 0; j < joints_.size(); ++j) {
    const CompiledJoint& jt = joints_[j];
    const Mat24 Hj = jt.hessian_contraction(mu.segment(joint_offsets_[j], jt.size()));
    const int a = 12 * jt.body_a();
    H.block<12, 12>(a, a) += Hj.topLeftCorner<12, 12>();
    if (!jt.grounded()) {
      const int b = 12 * jt.body_b();
      H.block<12, 12>(a, b) += Hj.topRightCorner<12, 12>();
      H.block<12, 12>(b, a) += Hj.bottomLeftCorner<12, 12>();
      H.block<12, 12>(b, b) += Hj.bottomRightCorner<12, 12>();
    }
  }
  return H;
}

double MultibodySystem::potential(const Vec& q) const { return grad_v_.dot(q); }

double MultibodySystem::hamiltonian(const Vec& q, const Vec& v) const {
  return 0.5 * v.dot(mass_.cwiseProduct(v)) + potential(q);
}

Vec3 MultibodySystem::angular_momentum(const Vec& q, const Vec& v) const {
  Vec3 L = Vec3::Zero();
  for (int k = 0; k < body_count(); ++k)
    L += phmbd::angular_momentum(bodies_[static_cast<size_t>(k)], body_block(q, k), body_block(v, k));
  return L;
}

Vec MultibodySystem::stacked_inputs(double t) const {
  Vec u(6 * static_cast<int>(loads_.size()));
  for (size_t l = 0; l < loads_.size(); ++l) u.segment<6>(6 * static_cast<int>(l)) = loads_[l].wrench(t);
  return u;
}

Mat MultibodySystem::input_map(const Vec& q) const {
  Mat B = Mat::Zero(n(), 6 * static_cast<int>(loads_.size()));
  for (size_t l = 0; l < loads_.size(); ++l) {
    const BodyLoad& ld = loads_[l];
    B.block<12, 6>(12 * ld.body, 6 * static_cast<int>(l)) =
        external_wrench_map(body_block(q, ld.body), ld.r_material);
  }
  return B;
}

Vec MultibodySystem::input_assembly(const Vec& q, double t) const {
  Vec f = Vec::Zero(n());
  for (const BodyLoad& ld : loads_)
    f.segment<12>(12 * ld.body) += external_wrench_map(body_block(q, ld.body), ld.r_material) * ld.wrench(t);
  return f;
}

Mat MultibodySystem::input_derivative(const Vec& q, double t) const {
  Mat D = Mat::Zero(n(), n());
  for (const BodyLoad& ld : loads_)
    D.block<12, 12>(12 * ld.body, 12 * ld.body) +=
        wrench_map_derivative(body_block(q, ld.body), ld.r_material, ld.wrench(t));
  return D;
}

double MultibodySystem::constraint_rank_margin(const Vec& q) const {
  const Mat G = constraint_jacobian(q);
  Eigen::JacobiSVD<Mat> svd(G);
  const Vec& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s[s.size() - 1];
}

ConstraintStack stack_constraints(const MultibodySystem& sys, const Vec& q) {
  return {sys.constraints(q), sys.constraint_jacobian(q)};
}

Potential potential(const MultibodySystem& sys, const Vec& q) {
  return {sys.potential(q), sys.potential_gradient()};
}

double hamiltonian(const MultibodySystem& sys, const Vec& q, const Vec& v) { return sys.hamiltonian(q, v); }

Vec3 total_angular_momentum(const MultibodySystem& sys, const Vec& q, const Vec& v) {
  return sys.angular_momentum(q, v);
}

Vec input_assembly(const MultibodySystem& sys, const Vec& q, double t) { return sys.input_assembly(q, t); }

PHOperators ph_operators(const MultibodySystem& sys, const SystemState& x) {
  const int n = sys.n(), m = sys.m();
  const Mat G = sys.constraint_jacobian(x.q);
  PHOperators op;
  op.E = Mat::Zero(2 * n + m, 2 * n + m);
  op.E.topLeftCorner(n, n).setIdentity();
  op.E.block(n, n, n, n) = sys.mass_diagonal().asDiagonal();
  op.J = Mat::Zero(2 * n + m, 2 * n + m);
  op.J.block(0, n, n, n).setIdentity();
  op.J.block(n, 0, n, n) = -Mat::Identity(n, n);
  op.J.block(n, 2 * n, n, m) = -G.transpose();
  op.J.block(2 * n, n, m, n) = G;
  op.z.resize(2 * n + m);
  op.z << sys.potential_gradient(), x.v, x.lambda;
  return op;
}

PHOperators ggl_operators(const MultibodySystem& sys, const SystemState& x) {
  const int n = sys.n(), m = sys.m();
  const Mat G = sys.constraint_jacobian(x.q);
  const Mat K = sys.velocity_jacobian_derivative(x.v);
  const auto Minv = sys.inverse_mass_diagonal().asDiagonal();
  const Mat MinvGt = Minv * G.transpose();
  const Mat GMinv = G * Minv;
  const Mat GMinvGt = G * MinvGt;
  const Mat KMinvGt = K * MinvGt;
  const Mat J44 = KMinvGt - KMinvGt.transpose();
  const int N = 2 * n + 2 * m;
  PHOperators op;
  op.E = Mat::Zero(N, N);
  op.E.topLeftCorner(n, n).setIdentity();
  op.E.block(n, n, n, n) = sys.mass_diagonal().asDiagonal();
  op.J = Mat::Zero(N, N);
  const int iq = 0, iv = n, il = 2 * n, ig = 2 * n + m;
  op.J.block(iq, iv, n, n).setIdentity();
  op.J.block(iq, ig, n, m) = MinvGt;
  op.J.block(iv, iq, n, n) = -Mat::Identity(n, n);
  op.J.block(iv, il, n, m) = -G.transpose();
  op.J.block(iv, ig, n, m) = -K.transpose();
  op.J.block(il, iv, m, n) = G;
  op.J.block(il, ig, m, m) = GMinvGt;
  op.J.block(ig, iq, m, n) = -GMinv;
  op.J.block(ig, iv, m, n) = K;
  op.J.block(ig, il, m, m) = -GMinvGt;
  op.J.block(ig, ig, m, m) = J44;
  op.z.resize(N);
  op.z << sys.potential_gradient(), x.v, x.lambda, (x.gamma ? *x.gamma : Vec::Zero(m));
  return op;
}

SystemState make_state(const MultibodySystem& sys, const Vec& q, const Vec& v, const Vec& lambda,
                       bool with_gamma) {
  SystemState s;
  s.q = q;
  s.v = v;
  s.lambda = lambda.size() == sys.m() ? lambda : Vec::Zero(sys.m());
  if (with_gamma) s.gamma = Vec::Zero(sys.m());
  return s;
}

}  // namespace phmbd
