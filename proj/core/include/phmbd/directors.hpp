#pragma once

#include "phmbd/types.hpp"

namespace phmbd {

// Coordinate layout of one body: q = (phi, d1, d2, d3), v = (v_phi, d1dot, d2dot, d3dot).
inline constexpr int kBodyDim = 12;
inline constexpr int kInternalConstraints = 6;

inline Vec3 position(const Vec12& q) { return q.segment<3>(0); }
inline Vec3 director(const Vec12& q, int i) { return q.segment<3>(3 + 3 * i); }

struct RigidBody {
  int index = 0;
  double mass = 1.0;
  Vec3 inertias = Vec3::Ones();
  Vec3 euler = Vec3::Constant(0.5);
  Vec3 gravity = Vec3::Zero();
  Vec3 dimensions = Vec3::Zero();  // rendering metadata, unused by the dynamics

  // Validates mass and inertias and derives the Euler values.
  static RigidBody create(int index, double mass, const Vec3& inertias,
                          const Vec3& gravity = Vec3::Zero(),
                          const Vec3& dimensions = Vec3::Zero());
};

Mat3 hat(const Vec3& a);

// E_i = (J_j + J_k - J_i) / 2 for cyclic (i, j, k).
Vec3 euler_values(const Vec3& inertias);

Vec12 mass_diagonal(const RigidBody& body);
Mat12 mass_matrix(const RigidBody& body);

// (|d1|^2-1)/2, (|d2|^2-1)/2, (|d3|^2-1)/2, d1.d2, d1.d3, d2.d3
Vec6 internal_constraints(const Vec12& q);
Mat6x12 internal_constraint_gradient(const Vec12& q);

// sum_k mu_k * Hessian(g_k); independent of q since the constraints are quadratic.
Mat12 internal_constraint_hessian(const Vec6& mu);

// Generalized force of a wrench (F, tau) applied at r = sum_i r_i d_i.
Mat12x6 external_wrench_map(const Vec12& q, const Vec3& r_material = Vec3::Zero());

// d/dq of external_wrench_map(q, r) * u.
Mat12 wrench_map_derivative(const Vec12& q, const Vec3& r_material, const Vec6& u);

Vec3 angular_momentum(const RigidBody& body, const Vec12& q, const Vec12& v);

// omega = 1/2 sum_i d_i x d_i_dot; exact for rigid fields d_i_dot = omega x d_i.
Vec3 angular_velocity(const Vec12& q, const Vec12& v);

// Rigid velocity field: v_phi, d_i_dot = omega x d_i.
Vec12 rigid_velocity(const Vec12& q, const Vec3& v_phi, const Vec3& omega);

bool is_orthonormal(const Vec12& q, double tol = 1e-6);

Vec12 identity_config(const Vec3& phi = Vec3::Zero());

}  // namespace phmbd
