#pragma once

#include <functional>

#include "phmbd/directors.hpp"

namespace phmbd::testing {

// Direct summation of kinetic energy straight from table rows:
// 1/2 m |v_phi|^2 + 1/2 sum_i E_i |d_i_dot|^2.
inline double kinetic_energy_oracle(double mass, const Vec3& inertias, const Vec12& v) {
  const double E1 = 0.5 * (inertias[1] + inertias[2] - inertias[0]);
  const double E2 = 0.5 * (inertias[2] + inertias[0] - inertias[1]);
  const double E3 = 0.5 * (inertias[0] + inertias[1] - inertias[2]);
  double T = 0.5 * mass * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double E[3] = {E1, E2, E3};
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += v[3 + 3 * i + c] * v[3 + 3 * i + c];
    T += 0.5 * E[i] * s;
  }
  return T;
}

// Classical rigid body in rotation-matrix form: Rdot = hat(omega) R, J_body Omegadot
// = (J Omega) x Omega + R^T tau, spatial omega = R Omega; center of mass m xddot = F.
struct NewtonEulerState {
  Mat3 R = Mat3::Identity();
  Vec3 Omega = Vec3::Zero();  // body frame
  Vec3 x = Vec3::Zero();
  Vec3 xdot = Vec3::Zero();
};

struct NewtonEulerBody {
  double mass = 1.0;
  Vec3 J = Vec3::Ones();
  std::function<Vec6(double, const NewtonEulerState&)> wrench;  // spatial (F, tau about phi)

  NewtonEulerState rate(double t, const NewtonEulerState& s) const {
    const Vec6 u = wrench ? wrench(t, s) : Vec6::Zero();
    NewtonEulerState d;
    d.R = s.R * hat(s.Omega);
    const Vec3 tau_b = s.R.transpose() * u.tail<3>();
    const Vec3 JO = J.cwiseProduct(s.Omega);
    d.Omega = (JO.cross(s.Omega) + tau_b).cwiseQuotient(J);
    d.x = s.xdot;
    d.xdot = u.head<3>() / mass;
    return d;
  }

  NewtonEulerState rk4(double t, const NewtonEulerState& s, double h) const {
    auto axpy = [](const NewtonEulerState& a, double c, const NewtonEulerState& b) {
      NewtonEulerState o;
      o.R = a.R + c * b.R;
      o.Omega = a.Omega + c * b.Omega;
      o.x = a.x + c * b.x;
      o.xdot = a.xdot + c * b.xdot;
      return o;
    };
    const NewtonEulerState k1 = rate(t, s);
    const NewtonEulerState k2 = rate(t + h / 2, axpy(s, h / 2, k1));
    const NewtonEulerState k3 = rate(t + h / 2, axpy(s, h / 2, k2));
    const NewtonEulerState k4 = rate(t + h, axpy(s, h, k3));
    NewtonEulerState o = s;
    o.R += h / 6 * (k1.R + 2 * k2.R + 2 * k3.R + k4.R);
    o.Omega += h / 6 * (k1.Omega + 2 * k2.Omega + 2 * k3.Omega + k4.Omega);
    o.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    o.xdot += h / 6 * (k1.xdot + 2 * k2.xdot + 2 * k3.xdot + k4.xdot);
    return o;
  }
};

// Director velocity of a Newton-Euler state: d_i_dot = R hat(Omega) e_i.
inline Vec12 director_velocity(const NewtonEulerState& s) {
  Vec12 v;
  const Mat3 Rdot = s.R * hat(s.Omega);
  v << s.xdot, Rdot.col(0), Rdot.col(1), Rdot.col(2);
  return v;
}

inline Vec12 director_config(const NewtonEulerState& s) {
  Vec12 q;
  q << s.x, s.R.col(0), s.R.col(1), s.R.col(2);
  return q;
}

}  // namespace phmbd::testing
