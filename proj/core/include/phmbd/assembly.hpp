#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phmbd/directors.hpp"
#include "phmbd/joints.hpp"

namespace phmbd {

// Time-dependent wrench (F, tau) on one body, applied at r = sum_i r_i d_i.
struct BodyLoad {
  int body = 0;
  Vec3 r_material = Vec3::Zero();
  std::function<Vec6(double)> wrench;
};

struct SystemState {
  double t = 0.0;
  Vec q;
  Vec v;
  Vec lambda;
  std::optional<Vec> gamma;
};

struct ConstraintStack {
  Vec g;
  Mat G;
};

class MultibodySystem {
 public:
  MultibodySystem() = default;
  MultibodySystem(std::vector<RigidBody> bodies, std::vector<CompiledJoint> joints,
                  std::vector<BodyLoad> loads = {});

  int body_count() const { return static_cast<int>(bodies_.size()); }
  int n() const { return kBodyDim * body_count(); }
  int m() const { return m_; }
  int internal_count() const { return kInternalConstraints * body_count(); }
  // Offset of the joint's rows inside the stacked constraint vector.
  int joint_offset(int j) const { return joint_offsets_[static_cast<size_t>(j)]; }

  const std::vector<RigidBody>& bodies() const { return bodies_; }
  const std::vector<CompiledJoint>& joints() const { return joints_; }
  const std::vector<BodyLoad>& loads() const { return loads_; }

  const Vec& mass_diagonal() const { return mass_; }
  const Vec& inverse_mass_diagonal() const { return inv_mass_; }

  // Ordering: internal constraints body by body, then joints in declaration order.
  Vec constraints(const Vec& q) const;
  Mat constraint_jacobian(const Vec& q) const;
  // K(w) = d/dq (G(q) w); constant in q. K(v) w = K(w) v.
  Mat velocity_jacobian_derivative(const Vec& w) const;
  // d/dq (G(q)^T mu); constant in q.
  Mat constraint_hessian(const Vec& mu) const;

  double potential(const Vec& q) const;
  const Vec& potential_gradient() const { return grad_v_; }
  double hamiltonian(const Vec& q, const Vec& v) const;
  Vec3 angular_momentum(const Vec& q, const Vec& v) const;

  bool has_loads() const { return !loads_.empty(); }
  Vec stacked_inputs(double t) const;       // 6 per load
  Mat input_map(const Vec& q) const;        // n x 6L
  Vec input_assembly(const Vec& q, double t) const;
  Mat input_derivative(const Vec& q, double t) const;  // d/dq input_assembly

  // Smallest singular value of G(q).
  double constraint_rank_margin(const Vec& q) const;

 private:
  std::vector<RigidBody> bodies_;
  std::vector<CompiledJoint> joints_;
  std::vector<BodyLoad> loads_;
  std::vector<int> joint_offsets_;
  int m_ = 0;
  Vec mass_;
  Vec inv_mass_;
  Vec grad_v_;
};

inline Vec12 body_block(const Vec& x, int k) { return x.segment<12>(kBodyDim * k); }

ConstraintStack stack_constraints(const MultibodySystem& sys, const Vec& q);

struct Potential {
  double value = 0.0;
  Vec gradient;
};
Potential potential(const MultibodySystem& sys, const Vec& q);
double hamiltonian(const MultibodySystem& sys, const Vec& q, const Vec& v);
Vec3 total_angular_momentum(const MultibodySystem& sys, const Vec& q, const Vec& v);
Vec input_assembly(const MultibodySystem& sys, const Vec& q, double t);

// Descriptor form E xdot = J(x) z(x) + B u.
struct PHOperators {
  Mat E;
  Mat J;
  Vec z;
};

// x = (q, v, lambda).
PHOperators ph_operators(const MultibodySystem& sys, const SystemState& x);
// x = (q, v, lambda, gamma); gamma defaults to zero when absent.
PHOperators ggl_operators(const MultibodySystem& sys, const SystemState& x);

// State at t = 0 with lambda from the given multipliers (zero if empty).
SystemState make_state(const MultibodySystem& sys, const Vec& q, const Vec& v,
                       const Vec& lambda = Vec(), bool with_gamma = false);

}  // namespace phmbd
