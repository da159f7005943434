#include "phmbd/joints.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace phmbd {

namespace {

constexpr double kAlignTol = 1e-9;

// Linear maps on x = (q_A, q_B). side 0 is A, side 1 is B.
Map3x24 select_position(int side) {
  Map3x24 m = Map3x24::Zero();
  m.block<3, 3>(0, 12 * side).setIdentity();
  return m;
}

Map3x24 director_combination(int side, const Vec3& c) {
  Map3x24 m = Map3x24::Zero();
  for (int i = 0; i < 3; ++i) m.block<3, 3>(0, 12 * side + 3 + 3 * i) = c[i] * Mat3::Identity();
  return m;
}

Map3x24 material_point(int side, const Vec3& X) {
  return select_position(side) + director_combination(side, X);
}

Mat3 director_matrix(const Vec12& q) {
  Mat3 R;
  for (int i = 0; i < 3; ++i) R.col(i) = director(q, i);
  return R;
}

BilinearRow fixed_dot(const Vec3& e, const Map3x24& b) {
  BilinearRow r;
  r.a0 = e;
  r.b = b;
  return r;
}

BilinearRow moving_dot(const Map3x24& a, const Map3x24& b, double c) {
  BilinearRow r;
  r.a = a;
  r.b = b;
  r.c = c;
  return r;
}

// B-director indices sorted by |n.d_j|, most orthogonal first, stable on index.
std::array<int, 3> by_orthogonality(const Vec3& n, const Vec12& qb) {
  std::array<int, 3> idx{0, 1, 2};
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
    return std::abs(n.dot(director(qb, i))) < std::abs(n.dot(director(qb, j)));
  });
  return idx;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

int constraint_count(PairType type) {
  switch (type) {
    case PairType::Spherical: return 3;
    case PairType::Cylindrical: return 4;
    case PairType::Universal: return 4;
    case PairType::Revolute: return 5;
    case PairType::Prismatic: return 5;
  }
  return 0;
}

std::string to_string(PairType type) {
  switch (type) {
    case PairType::Spherical: return "spherical";
    case PairType::Cylindrical: return "cylindrical";
    case PairType::Universal: return "universal";
    case PairType::Revolute: return "revolute";
    case PairType::Prismatic: return "prismatic";
  }
  return "unknown";
}

PairType pair_type_from_string(const std::string& name) {
  const std::string s = lower(name);
  if (s == "spherical") return PairType::Spherical;
  if (s == "cylindrical") return PairType::Cylindrical;
  if (s == "universal") return PairType::Universal;
  if (s == "revolute") return PairType::Revolute;
  if (s == "prismatic") return PairType::Prismatic;
  throw ConfigurationError("unknown kinematic pair type '" + name + "'");
}

JointFrame joint_frame(const Vec3& n_local) {
  const double len = n_local.norm();
  if (!(len > 0.0) || !std::isfinite(len)) throw ConfigurationError("joint axis has zero norm");
  JointFrame f;
  f.n = n_local / len;
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(f.n[i]) < std::abs(f.n[k])) k = i;
  const Vec3 e = Vec3::Unit(k);
  f.m1 = (e - f.n.dot(e) * f.n).normalized();
  f.m2 = f.n.cross(f.m1);
  return f;
}

Vec12 ground_config() { return identity_config(); }

Eigen::Matrix<double, 24, 1> CompiledJoint::stack(const Vec12& q_a, const Vec12& q_b) const {
  Eigen::Matrix<double, 24, 1> x;
  x.head<12>() = q_a;
  x.tail<12>() = grounded() ? ground_config() : q_b;
  return x;
}

Vec CompiledJoint::residual(const Vec12& q_a, const Vec12& q_b) const {
  const auto x = stack(q_a, q_b);
  Vec r(size());
  for (int k = 0; k < size(); ++k) {
    const BilinearRow& row = rows_[static_cast<size_t>(k)];
    r[k] = (row.a0 + row.a * x).dot(row.b0 + row.b * x) - row.c;
  }
  return r;
}

Mat CompiledJoint::jacobian(const Vec12& q_a, const Vec12& q_b) const {
  const auto x = stack(q_a, q_b);
  Mat J(size(), 24);
  for (int k = 0; k < size(); ++k) {
    const BilinearRow& row = rows_[static_cast<size_t>(k)];
    const Vec3 a = row.a0 + row.a * x;
    const Vec3 b = row.b0 + row.b * x;
    J.row(k) = (row.a.transpose() * b + row.b.transpose() * a).transpose();
  }
  if (grounded()) J.rightCols<12>().setZero();
  return J;
}

Mat CompiledJoint::velocity_jacobian_derivative(const Eigen::Matrix<double, 24, 1>& w) const {
  Mat K(size(), 24);
  for (int k = 0; k < size(); ++k) K.row(k) = (hessians_[static_cast<size_t>(k)] * w).transpose();
  return K;
}

Mat24 CompiledJoint::hessian_contraction(const Vec& mu) const {
  Mat24 H = Mat24::Zero();
  for (int k = 0; k < size(); ++k) H += mu[k] * hessians_[static_cast<size_t>(k)];
  return H;
}

CompiledJoint compile(const JointSpec& spec, const std::vector<Vec12>& configs) {
  const int nb = static_cast<int>(configs.size());
  if (spec.body_a < 0 || spec.body_a >= nb || spec.body_b < 0 || spec.body_b >= nb) {
    throw ConfigurationError("joint references a body index outside [0, " + std::to_string(nb) + ")");
  }
  const bool needs_axis = spec.type != PairType::Spherical;
  if (needs_axis && !spec.reference_axis) {
    throw ConfigurationError(to_string(spec.type) + " joint requires a reference axis");
  }

  CompiledJoint j;
  j.type_ = spec.type;
  j.body_a_ = spec.body_a;
  j.body_b_ = spec.body_b;

  const Vec12& qa = configs[static_cast<size_t>(spec.body_a)];
  const Vec12 qb = spec.grounded() ? ground_config() : configs[static_cast<size_t>(spec.body_b)];

  // Table directors are rounded, so invert R instead of transposing it.
  const Mat3 Ra = director_matrix(qa);
  j.anchor_a_ = Ra.partialPivLu().solve(spec.location - position(qa));
  j.anchor_b_ = spec.grounded() ? spec.location
                                : Mat3(director_matrix(qb)).partialPivLu().solve(spec.location - position(qb));

  if (needs_axis) j.frame_ = joint_frame(*spec.reference_axis);

  const Map3x24 dp = material_point(1, j.anchor_b_) - material_point(0, j.anchor_a_);
  const Map3x24 n_map = director_combination(0, j.frame_.n);
  const Map3x24 m1_map = director_combination(0, j.frame_.m1);
  const Map3x24 m2_map = director_combination(0, j.frame_.m2);
  const Vec3 n0 = Ra * j.frame_.n;

  auto add_point_rows = [&] {
    for (int k = 0; k < 3; ++k) j.rows_.push_back(fixed_dot(Vec3::Unit(k), dp));
  };
  auto add_rotation_locks = [&] {
    std::array<int, 2> pick{0, 1};
    const bool aligned = std::abs(n0.dot(director(qb, 0))) > 1.0 - kAlignTol ||
                         std::abs(n0.dot(director(qb, 1))) > 1.0 - kAlignTol;
    if (aligned) {
      const auto order = by_orthogonality(n0, qb);
      pick = {std::min(order[0], order[1]), std::max(order[0], order[1])};
    }
    for (int d : pick) {
      if (std::abs(n0.dot(director(qb, d))) > 1.0 - kAlignTol) {
        throw ConfigurationError("degenerate rotation lock: joint axis aligned with a body-B director");
      }
    }
    j.locked_ = pick;
    for (int d : pick) {
      const double eta = n0.dot(director(qb, d));
      j.constants_.push_back(eta);
      j.rows_.push_back(moving_dot(n_map, director_combination(1, Vec3::Unit(d)), eta));
    }
  };

  switch (spec.type) {
    case PairType::Spherical:
      add_point_rows();
      break;
    case PairType::Cylindrical:
      j.rows_.push_back(moving_dot(m1_map, dp, 0.0));
      j.rows_.push_back(moving_dot(m2_map, dp, 0.0));
      add_rotation_locks();
      break;
    case PairType::Revolute:
      add_point_rows();
      add_rotation_locks();
      break;
    case PairType::Prismatic: {
      j.rows_.push_back(moving_dot(m1_map, dp, 0.0));
      j.rows_.push_back(moving_dot(m2_map, dp, 0.0));
      const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {1, 2}, {2, 0}}};
      for (const auto& p : pairs) {
        const double c = director(qa, p[0]).dot(director(qb, p[1]));
        j.constants_.push_back(c);
        j.rows_.push_back(moving_dot(director_combination(0, Vec3::Unit(p[0])),
                                     director_combination(1, Vec3::Unit(p[1])), c));
      }
      break;
    }
    case PairType::Universal: {
      add_point_rows();
      const int b = by_orthogonality(n0, qb)[0];
      j.locked_ = {b, -1};
      const double eta = n0.dot(director(qb, b));
      j.constants_.push_back(eta);
      j.rows_.push_back(moving_dot(n_map, director_combination(1, Vec3::Unit(b)), eta));
      break;
    }
  }

  for (const BilinearRow& row : j.rows_) {
    Mat24 H = row.a.transpose() * row.b + row.b.transpose() * row.a;
    if (j.grounded()) {
      H.rightCols<12>().setZero();
      H.bottomRows<12>().setZero();
    }
    j.hessians_.push_back(H);
  }
  return j;
}

}  // namespace phmbd
