#include "phmbd/directors.hpp"

#include <cmath>
#include <sstream>

namespace phmbd {

Mat3 hat(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

Vec3 euler_values(const Vec3& J) {
  Vec3 e;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    e[i] = 0.5 * (J[j] + J[k] - J[i]);
  }
  for (int i = 0; i < 3; ++i) {
    if (!(J[i] > 0.0) || !(e[i] > 0.0)) {
      std::ostringstream os;
      os << "inertias inconsistent with a rigid body: J = (" << J.transpose()
         << "), E = (" << e.transpose() << ")";
      throw ConfigurationError(os.str());
    }
  }
  return e;
}

RigidBody RigidBody::create(int index, double mass, const Vec3& inertias,
                            const Vec3& gravity, const Vec3& dimensions) {
  if (!(mass > 0.0)) {
    throw ConfigurationError("body " + std::to_string(index) + ": mass must be positive");
  }
  RigidBody b;
  b.index = index;
  b.mass = mass;
  b.inertias = inertias;
  b.euler = euler_values(inertias);
  b.gravity = gravity;
  b.dimensions = dimensions;
  return b;
}

Vec12 mass_diagonal(const RigidBody& body) {
  Vec12 m;
  m.segment<3>(0).setConstant(body.mass);
  for (int i = 0; i < 3; ++i) m.segment<3>(3 + 3 * i).setConstant(body.euler[i]);
  return m;
}

Mat12 mass_matrix(const RigidBody& body) { return mass_diagonal(body).asDiagonal(); }

Vec6 internal_constraints(const Vec12& q) {
  const Vec3 d1 = director(q, 0), d2 = director(q, 1), d3 = director(q, 2);
  Vec6 g;
  g << 0.5 * (d1.dot(d1) - 1.0), 0.5 * (d2.dot(d2) - 1.0), 0.5 * (d3.dot(d3) - 1.0),
      d1.dot(d2), d1.dot(d3), d2.dot(d3);
  return g;
}

Mat6x12 internal_constraint_gradient(const Vec12& q) {
  const Vec3 d1 = director(q, 0), d2 = director(q, 1), d3 = director(q, 2);
  Mat6x12 G = Mat6x12::Zero();
  G.block<1, 3>(0, 3) = d1.transpose();
  G.block<1, 3>(1, 6) = d2.transpose();
  G.block<1, 3>(2, 9) = d3.transpose();
  G.block<1, 3>(3, 3) = d2.transpose();
  G.block<1, 3>(3, 6) = d1.transpose();
  G.block<1, 3>(4, 3) = d3.transpose();
  G.block<1, 3>(4, 9) = d1.transpose();
  G.block<1, 3>(5, 6) = d3.transpose();
  G.block<1, 3>(5, 9) = d2.transpose();
  return G;
}

Mat12 internal_constraint_hessian(const Vec6& mu) {
  // director block [[mu1, mu4, mu5], [mu4, mu2, mu6], [mu5, mu6, mu3]] (x) I3
  Mat3 c;
  c << mu[0], mu[3], mu[4],
       mu[3], mu[1], mu[5],
       mu[4], mu[5], mu[2];
  Mat12 H = Mat12::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) H.block<3, 3>(3 + 3 * i, 3 + 3 * j) = c(i, j) * Mat3::Identity();
  return H;
}

Mat12x6 external_wrench_map(const Vec12& q, const Vec3& r_material) {
  Vec3 r = Vec3::Zero();
  for (int i = 0; i < 3; ++i) r += r_material[i] * director(q, i);
  const Mat3 rh = hat(r);
  Mat12x6 B = Mat12x6::Zero();
  B.block<3, 3>(0, 0).setIdentity();
  for (int i = 0; i < 3; ++i) {
    const Mat3 dh = hat(director(q, i));
    B.block<3, 3>(3 + 3 * i, 0) = -0.5 * dh * rh;
    B.block<3, 3>(3 + 3 * i, 3) = -0.5 * dh;
  }
  return B;
}

Mat12 wrench_map_derivative(const Vec12& q, const Vec3& r_material, const Vec6& u) {
  // f_i = -1/2 d_i x m with m = r x F + tau and r = sum_k X_k d_k.
  const Vec3 F = u.head<3>();
  const Vec3 tau = u.tail<3>();
  Vec3 r = Vec3::Zero();
  for (int i = 0; i < 3; ++i) r += r_material[i] * director(q, i);
  const Vec3 m = r.cross(F) + tau;
  const Mat3 mh = hat(m);
  const Mat3 Fh = hat(F);
  Mat12 D = Mat12::Zero();
  for (int i = 0; i < 3; ++i) {
    const Mat3 dh = hat(director(q, i));
    for (int k = 0; k < 3; ++k) {
      Mat3 blk = 0.5 * r_material[k] * dh * Fh;
      if (i == k) blk += 0.5 * mh;
      D.block<3, 3>(3 + 3 * i, 3 + 3 * k) = blk;
    }
  }
  return D;
}

Vec3 angular_momentum(const RigidBody& body, const Vec12& q, const Vec12& v) {
  Vec3 L = position(q).cross(body.mass * v.segment<3>(0));
  for (int i = 0; i < 3; ++i) L += director(q, i).cross(body.euler[i] * v.segment<3>(3 + 3 * i));
  return L;
}

Vec3 angular_velocity(const Vec12& q, const Vec12& v) {
  Vec3 w = Vec3::Zero();
  for (int i = 0; i < 3; ++i) w += director(q, i).cross(v.segment<3>(3 + 3 * i));
  return 0.5 * w;
}

Vec12 rigid_velocity(const Vec12& q, const Vec3& v_phi, const Vec3& omega) {
  Vec12 v;
  v.segment<3>(0) = v_phi;
  for (int i = 0; i < 3; ++i) v.segment<3>(3 + 3 * i) = omega.cross(director(q, i));
  return v;
}

bool is_orthonormal(const Vec12& q, double tol) {
  return internal_constraints(q).cwiseAbs().maxCoeff() <= tol;
}

Vec12 identity_config(const Vec3& phi) {
  Vec12 q = Vec12::Zero();
  q.segment<3>(0) = phi;
  q[3] = q[7] = q[11] = 1.0;
  return q;
}

}  // namespace phmbd
