#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "phmbd/directors.hpp"

namespace phmbd {

enum class PairType { Spherical, Cylindrical, Universal, Revolute, Prismatic };

int constraint_count(PairType type);
std::string to_string(PairType type);
PairType pair_type_from_string(const std::string& name);  // case-insensitive

struct JointSpec {
  PairType type = PairType::Spherical;
  int body_a = 0;
  int body_b = 0;  // equal to body_a: the second slot is ground
  Vec3 location = Vec3::Zero();
  std::optional<Vec3> reference_axis;  // body-A director components

  bool grounded() const { return body_a == body_b; }
};

// Right-handed orthonormal triple (n, m1, m2), components in the director basis of body A.
struct JointFrame {
  Vec3 n = Vec3::UnitZ();
  Vec3 m1 = Vec3::UnitX();
  Vec3 m2 = Vec3::UnitY();
};

// Completion rule: take e_k with the smallest |n.e_k| (lowest k on ties),
// m1 = normalize(e_k - (n.e_k) n), m2 = n x m1.
JointFrame joint_frame(const Vec3& n_local);

// Ground pseudo-body: phi = 0, d_i = e_i.
Vec12 ground_config();

using Map3x24 = Eigen::Matrix<double, 3, 24>;
using Mat24 = Eigen::Matrix<double, 24, 24>;

// One scalar constraint <a(x), b(x)> - c, where a and b are affine in x = (q_A, q_B).
struct BilinearRow {
  Vec3 a0 = Vec3::Zero();
  Map3x24 a = Map3x24::Zero();
  Vec3 b0 = Vec3::Zero();
  Map3x24 b = Map3x24::Zero();
  double c = 0.0;
};

class CompiledJoint {
 public:
  CompiledJoint() = default;

  PairType type() const { return type_; }
  int body_a() const { return body_a_; }
  int body_b() const { return body_b_; }
  bool grounded() const { return body_a_ == body_b_; }
  int size() const { return static_cast<int>(rows_.size()); }

  const Vec3& anchor_a() const { return anchor_a_; }
  const Vec3& anchor_b() const { return anchor_b_; }
  const JointFrame& frame() const { return frame_; }
  // Cylindrical/revolute: the two B directors used in the rotation locks.
  // Universal: first entry is the B director paired with the reference axis.
  const std::array<int, 2>& locked_directors() const { return locked_; }
  const std::vector<double>& lock_constants() const { return constants_; }
  const std::vector<BilinearRow>& rows() const { return rows_; }

  // q_b is ignored for ground joints.
  Vec residual(const Vec12& q_a, const Vec12& q_b) const;
  // m_J x 24, columns (q_A, q_B); ground columns are zero.
  Mat jacobian(const Vec12& q_a, const Vec12& q_b) const;
  // d/dq (jacobian(q) w); constant in q.
  Mat velocity_jacobian_derivative(const Eigen::Matrix<double, 24, 1>& w) const;
  // sum_r mu_r * Hessian(g_r); constant in q.
  Mat24 hessian_contraction(const Vec& mu) const;
  const Mat24& row_hessian(int r) const { return hessians_[static_cast<size_t>(r)]; }

  friend CompiledJoint compile(const JointSpec& spec, const std::vector<Vec12>& configs);

 private:
  Eigen::Matrix<double, 24, 1> stack(const Vec12& q_a, const Vec12& q_b) const;

  PairType type_ = PairType::Spherical;
  int body_a_ = 0;
  int body_b_ = 0;
  Vec3 anchor_a_ = Vec3::Zero();
  Vec3 anchor_b_ = Vec3::Zero();
  JointFrame frame_;
  std::array<int, 2> locked_{-1, -1};
  std::vector<double> constants_;
  std::vector<BilinearRow> rows_;
  std::vector<Mat24> hessians_;
};

// Anchors are X = R^{-1} (location - phi) at the initial configuration; lock
// constants are taken from the initial configuration so the residual starts at zero.
CompiledJoint compile(const JointSpec& spec, const std::vector<Vec12>& configs);

}  // namespace phmbd
