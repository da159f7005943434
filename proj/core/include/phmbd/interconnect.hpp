#pragma once

#include "phmbd/assembly.hpp"
#include "phmbd/joints.hpp"

namespace phmbd {

using Mat12x4 = Eigen::Matrix<double, 12, 4>;
using Mat12x2 = Eigen::Matrix<double, 12, 2>;
using Mat4x24 = Eigen::Matrix<double, 4, 24>;

// Velocity-related port maps of a cylindrical pair, resolved in the joint frame.
// Internal columns: force along m1, m2 and torque about m1, m2.
// External columns: force along n and torque about n.
struct PortDecomposition {
  Mat12x4 int_a = Mat12x4::Zero();
  Mat12x4 int_b = Mat12x4::Zero();
  Mat12x2 ext_a = Mat12x2::Zero();
  Mat12x2 ext_b = Mat12x2::Zero();
};

// A-side lever X_i I - 1/2 hat(d_i) hat(dp); B-side lever X_i I.
// Throws ConfigurationError for anything but a cylindrical pair.
PortDecomposition internal_port_matrices(const CompiledJoint& joint, const Vec12& q_a, const Vec12& q_b);

// [-B_int^A^T, B_int^B^T], acting on (v_A, v_B).
Mat4x24 port_constraint_map(const PortDecomposition& ports);

struct EquivalenceReport {
  double port_defect = 0.0;        // ports applied to null(G_J)
  double constraint_defect = 0.0;  // G_J applied to null(ports)
  int port_rank = 0;
  int constraint_rank = 0;
  double defect() const { return std::max(port_defect, constraint_defect); }
};

// Orthonormal basis of the numerical null space, rank threshold rel_tol * sigma_max.
Mat null_space(const Mat& A, double rel_tol = 1e-10);
// max over unit v in span(basis) of |A v|; basis must have orthonormal columns.
double containment_defect(const Mat& A, const Mat& basis);

// Compares null spaces on rigid velocities of both bodies (null of the internal
// constraint gradients), where the two descriptions coincide. Throws
// std::runtime_error if G_J is rank deficient there.
EquivalenceReport nullspace_equivalence(const PortDecomposition& ports, const Mat& joint_jacobian,
                                        const Vec12& q_a, const Vec12& q_b);

// Power exchanged across the internal ports.
double interconnection_power(const Vec& u_a, const Vec& y_a, const Vec& u_b, const Vec& y_b);

struct CoupledOperators {
  Mat E;
  Mat J;
  Vec z;
};

// Transformer coupling of two port-Hamiltonian subsystems with lambda_J = u_A = -u_B.
// bint_a/bint_b map the internal inputs into each subsystem's state rows.
CoupledOperators transformer_couple(const PHOperators& a, const Mat& bint_a, const PHOperators& b,
                                    const Mat& bint_b, const Vec& lambda_j);

// Two free bodies (each with its orthonormality constraints) joined by a cylindrical
// pair through its ports. Per-body state (q, v, lambda_d); the full vector is
// (x_A, x_B, lambda_J). Multiplier entries hold midpoint values.
class PortCoupledPair {
 public:
  PortCoupledPair(const MultibodySystem& sys, int joint_index);

  int subsystem_size() const { return 30; }
  int size() const { return 64; }

  Vec pack(const SystemState& s, const Vec& lambda_j) const;

  Vec interconnect_then_discretize(const Vec& x0, const Vec& x1, double h) const;
  Vec discretize_then_interconnect(const Vec& x0, const Vec& x1, double h) const;

  const MultibodySystem& body(int side) const { return side == 0 ? body_a_ : body_b_; }

 private:
  struct Midpoint {
    SystemState a, b;
    Vec lambda_j;
  };
  Midpoint midpoint(const Vec& x0, const Vec& x1) const;
  Mat embed(const Mat12x4& port) const;

  MultibodySystem body_a_;
  MultibodySystem body_b_;
  CompiledJoint joint_;
  int index_a_ = 0;
  int index_b_ = 1;
};

}  // namespace phmbd
