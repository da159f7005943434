#include "phmbd/interconnect.hpp"

#include <Eigen/SVD>
#include <stdexcept>

namespace phmbd {

PortDecomposition internal_port_matrices(const CompiledJoint& joint, const Vec12& q_a, const Vec12& q_b) {
  if (joint.type() != PairType::Cylindrical) {
    throw ConfigurationError("port decomposition is only derived for the cylindrical pair, not " +
                             to_string(joint.type()));
  }
  const Vec12 qb = joint.grounded() ? ground_config() : q_b;
  const JointFrame& f = joint.frame();
  Vec3 n = Vec3::Zero(), m1 = Vec3::Zero(), m2 = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    n += f.n[i] * director(q_a, i);
    m1 += f.m1[i] * director(q_a, i);
    m2 += f.m2[i] * director(q_a, i);
  }
  Vec3 dp = position(qb) - position(q_a);
  for (int i = 0; i < 3; ++i)
    dp += joint.anchor_b()[i] * director(qb, i) - joint.anchor_a()[i] * director(q_a, i);
  const Mat3 dph = hat(dp);

  PortDecomposition p;
  const Vec3 axes[2] = {m1, m2};
  for (int c = 0; c < 2; ++c) {
    p.int_a.block<3, 1>(0, c) = axes[c];
    p.int_b.block<3, 1>(0, c) = axes[c];
  }
  p.ext_a.block<3, 1>(0, 0) = n;
  p.ext_b.block<3, 1>(0, 0) = n;
  for (int i = 0; i < 3; ++i) {
    const Mat3 da = hat(director(q_a, i));
    const Mat3 db = hat(director(qb, i));
    const Mat3 lever_a = joint.anchor_a()[i] * Mat3::Identity() - 0.5 * da * dph;
    const Mat3 lever_b = joint.anchor_b()[i] * Mat3::Identity();
    const int r = 3 + 3 * i;
    for (int c = 0; c < 2; ++c) {
      p.int_a.block<3, 1>(r, c) = lever_a * axes[c];
      p.int_b.block<3, 1>(r, c) = lever_b * axes[c];
      p.int_a.block<3, 1>(r, 2 + c) = -0.5 * da * axes[c];
      p.int_b.block<3, 1>(r, 2 + c) = -0.5 * db * axes[c];
    }
    p.ext_a.block<3, 1>(r, 0) = lever_a * n;
    p.ext_b.block<3, 1>(r, 0) = lever_b * n;
    p.ext_a.block<3, 1>(r, 1) = -0.5 * da * n;
    p.ext_b.block<3, 1>(r, 1) = -0.5 * db * n;
  }
  return p;
}

Mat4x24 port_constraint_map(const PortDecomposition& ports) {
  Mat4x24 P;
  P.leftCols<12>() = -ports.int_a.transpose();
  P.rightCols<12>() = ports.int_b.transpose();
  return P;
}

Mat null_space(const Mat& A, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() > 0 ? s[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * smax) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

double containment_defect(const Mat& A, const Mat& basis) {
  if (basis.cols() == 0) return 0.0;
  const Mat AN = A * basis;
  Eigen::JacobiSVD<Mat> svd(AN);
  return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

EquivalenceReport nullspace_equivalence(const PortDecomposition& ports, const Mat& joint_jacobian,
                                        const Vec12& q_a, const Vec12& q_b) {
  Mat internal = Mat::Zero(12, 24);
  internal.block<6, 12>(0, 0) = internal_constraint_gradient(q_a);
  internal.block<6, 12>(6, 12) = internal_constraint_gradient(q_b);
  const Mat rigid = null_space(internal);

  const Mat P = Mat(port_constraint_map(ports)) * rigid;
  const Mat G = joint_jacobian * rigid;
  const Mat nullG = null_space(G);
  const Mat nullP = null_space(P);

  EquivalenceReport rep;
  rep.constraint_rank = static_cast<int>(G.cols() - nullG.cols());
  rep.port_rank = static_cast<int>(P.cols() - nullP.cols());
  if (rep.constraint_rank < joint_jacobian.rows()) {
    throw std::runtime_error("joint jacobian is rank deficient on rigid velocities (rank " +
                             std::to_string(rep.constraint_rank) + ")");
  }
  rep.port_defect = containment_defect(P, nullG);
  rep.constraint_defect = containment_defect(G, nullP);
  return rep;
}

double interconnection_power(const Vec& u_a, const Vec& y_a, const Vec& u_b, const Vec& y_b) {
  return u_a.dot(y_a) + u_b.dot(y_b);
}

CoupledOperators transformer_couple(const PHOperators& a, const Mat& bint_a, const PHOperators& b,
                                    const Mat& bint_b, const Vec& lambda_j) {
  const int na = static_cast<int>(a.z.size());
  const int nb = static_cast<int>(b.z.size());
  const int k = static_cast<int>(lambda_j.size());
  if (bint_a.rows() != na || bint_b.rows() != nb || bint_a.cols() != k || bint_b.cols() != k) {
    throw ConfigurationError("port dimension mismatch in transformer interconnection");
  }
  const int N = na + nb + k;
  CoupledOperators c;
  c.E = Mat::Zero(N, N);
  c.E.topLeftCorner(na, na) = a.E;
  c.E.block(na, na, nb, nb) = b.E;
  c.J = Mat::Zero(N, N);
  c.J.topLeftCorner(na, na) = a.J;
  c.J.block(na, na, nb, nb) = b.J;
  c.J.block(0, na + nb, na, k) = bint_a;
  c.J.block(na, na + nb, nb, k) = -bint_b;
  c.J.block(na + nb, 0, k, na) = -bint_a.transpose();
  c.J.block(na + nb, na, k, nb) = bint_b.transpose();
  c.z.resize(N);
  c.z << a.z, b.z, lambda_j;
  return c;
}

PortCoupledPair::PortCoupledPair(const MultibodySystem& sys, int joint_index) {
  if (joint_index < 0 || joint_index >= static_cast<int>(sys.joints().size()))
    throw ConfigurationError("joint index out of range");
  joint_ = sys.joints()[static_cast<size_t>(joint_index)];
  if (joint_.type() != PairType::Cylindrical || joint_.grounded())
    throw ConfigurationError("port coupling needs a cylindrical pair between two bodies");
  index_a_ = joint_.body_a();
  index_b_ = joint_.body_b();
  body_a_ = MultibodySystem({sys.bodies()[static_cast<size_t>(index_a_)]}, {});
  body_b_ = MultibodySystem({sys.bodies()[static_cast<size_t>(index_b_)]}, {});
}

Vec PortCoupledPair::pack(const SystemState& s, const Vec& lambda_j) const {
  Vec x(size());
  x << body_block(s.q, index_a_), body_block(s.v, index_a_), s.lambda.segment<6>(6 * index_a_),
      body_block(s.q, index_b_), body_block(s.v, index_b_), s.lambda.segment<6>(6 * index_b_), lambda_j;
  return x;
}

PortCoupledPair::Midpoint PortCoupledPair::midpoint(const Vec& x0, const Vec& x1) const {
  auto half = [&](int off) {
    SystemState s;
    s.q = 0.5 * (x0.segment<12>(off) + x1.segment<12>(off));
    s.v = 0.5 * (x0.segment<12>(off + 12) + x1.segment<12>(off + 12));
    s.lambda = x1.segment<6>(off + 24);
    return s;
  };
  return {half(0), half(30), x1.tail<4>()};
}

Mat PortCoupledPair::embed(const Mat12x4& port) const {
  Mat B = Mat::Zero(30, 4);
  B.block<12, 4>(12, 0) = port;
  return B;
}

namespace {

// Row sums accumulate in extended precision and round once, so the coupled and the
// per-subsystem assemblies do not differ by summation order.
Vec accumulate(const Mat& A, const Vec& x, const Mat* B = nullptr, const Vec* u = nullptr) {
  Vec out(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    long double acc = 0.0L;
    for (int j = 0; j < A.cols(); ++j) acc += static_cast<long double>(A(i, j)) * x[j];
    if (B)
      for (int j = 0; j < B->cols(); ++j) acc += static_cast<long double>((*B)(i, j)) * (*u)[j];
    out[i] = static_cast<double>(acc);
  }
  return out;
}

}  // namespace

Vec PortCoupledPair::interconnect_then_discretize(const Vec& x0, const Vec& x1, double h) const {
  const Midpoint mid = midpoint(x0, x1);
  const PortDecomposition ports = internal_port_matrices(joint_, mid.a.q, mid.b.q);
  const CoupledOperators c = transformer_couple(ph_operators(body_a_, mid.a), embed(ports.int_a),
                                                ph_operators(body_b_, mid.b), embed(ports.int_b), mid.lambda_j);
  return accumulate(c.E, x1 - x0) - h * accumulate(c.J, c.z);
}

Vec PortCoupledPair::discretize_then_interconnect(const Vec& x0, const Vec& x1, double h) const {
  const Midpoint mid = midpoint(x0, x1);
  const PortDecomposition ports = internal_port_matrices(joint_, mid.a.q, mid.b.q);
  const PHOperators a = ph_operators(body_a_, mid.a);
  const PHOperators b = ph_operators(body_b_, mid.b);
  const Mat ba = embed(ports.int_a);
  const Mat bb = embed(ports.int_b);
  // each subsystem sees its own internal input; u_A = lambda_J, u_B = -lambda_J
  const Vec u_a = mid.lambda_j;
  const Vec u_b = -mid.lambda_j;
  const Vec y_a = accumulate(ba.transpose(), a.z);
  const Vec y_b = accumulate(bb.transpose(), b.z);
  Vec r(size());
  r.segment<30>(0) = accumulate(a.E, x1.segment<30>(0) - x0.segment<30>(0)) - h * accumulate(a.J, a.z, &ba, &u_a);
  r.segment<30>(30) = accumulate(b.E, x1.segment<30>(30) - x0.segment<30>(30)) - h * accumulate(b.J, b.z, &bb, &u_b);
  r.tail<4>() = h * (y_a - y_b);
  return r;
}

}  // namespace phmbd
