#include "hdtsim/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace hdt {

namespace {

bool symmetric(const Eigen::Matrix3d& m, double tol = 1e-9) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

constexpr double kSqrt3Half = 0.86602540378443864676;  // sin(2*pi/3)

}  // namespace

PlantParams derive_composites(PlantParams p) {
  if (!(p.l1 > 0 && p.l2 > 0 && p.lp > 0 && p.ls > 0 && p.c > 0)) {
    throw std::invalid_argument("plant: inductances and capacitance must be positive");
  }
  if (!(p.alpha > 0) || !(p.beta >= 0)) {
    throw std::invalid_argument("plant: turns ratios must be positive");
  }
  if (!symmetric(p.r_load) || p.r_load.diagonal().minCoeff() <= 0) {
    throw std::invalid_argument("plant: r_load must be symmetric with positive diagonal");
  }
  if (!symmetric(p.l_load)) {
    throw std::invalid_argument("plant: l_load must be symmetric");
  }
  Eigen::LLT<Eigen::Matrix3d> llt(p.l_load);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("plant: l_load must be positive definite");
  }

  p.lbar1 = p.l1 + p.beta * p.beta * (p.ls + p.alpha * p.alpha * p.lp);
  p.rbar1 = p.r1 + p.beta * p.beta * (p.rs + p.alpha * p.alpha * p.rp);
  p.rbar2 = p.r2 * Eigen::Matrix3d::Identity() + p.r_load;
  p.l_load_inv = p.l_load.inverse();
  p.composites_ready = true;
  return p;
}

ThreePhase load_voltage(const PlantState& s, const ExogenousInputs& u, const PlantParams& p) {
  const Eigen::Vector3d ir = -p.beta * s.i1.vec() + s.i2.vec() - s.i3.vec() - u.iload.vec();
  return ThreePhase::from(p.r_load * ir);
}

ThreePhase grid_current(const PlantState& s, const PlantParams& p) {
  return -p.beta * s.i1;
}

PlantState derivative(const PlantState& s, const ExogenousInputs& u, const DutyPair& d,
                      const PlantParams& p) {
  const Eigen::Vector3d i1 = s.i1.vec(), i2 = s.i2.vec(), i3 = s.i3.vec();
  const Eigen::Vector3d il = u.iload.vec(), vin = u.vin.vec();
  const Eigen::Vector3d d1 = d.d1.vec(), d2 = d.d2.vec();
  const Eigen::Matrix3d& r = p.r_load;

  const Eigen::Vector3d ri1 = r * i1, ri2 = r * i2, ri3 = r * i3, ril = r * il;

  const Eigen::Vector3d di1 =
      (-p.rbar1 * i1 - p.beta * p.beta * ri1 + p.beta * (ri2 - ri3 - ril) -
       p.alpha * p.beta * vin + d1 * s.vc) / p.lbar1;
  const Eigen::Vector3d di2 =
      (p.beta * ri1 - p.rbar2 * i2 + ri3 + ril + d2 * s.vc) / p.l2;
  const Eigen::Vector3d di3 = p.l_load_inv * (-p.beta * ri1 + ri2 - ri3 - ril);
  const double dvc = (-d1.dot(i1) - d2.dot(i2)) / p.c;

  return {ThreePhase::from(di1), ThreePhase::from(di2), ThreePhase::from(di3), dvc};
}

void source_waveforms(double theta, double vin_pk, double iload_pk, ThreePhase& vin,
                      ThreePhase& iload) {
  const ThreePhase tmpl{std::sin(theta), std::sin(theta - kTwoPi / 3.0),
                        std::sin(theta + kTwoPi / 3.0)};
  vin = vin_pk * tmpl;
  iload = iload_pk * tmpl;
}

ThreePhase PhasorSolution::at(const Eigen::Vector3cd& x, double theta) {
  const std::complex<double> rot(std::cos(theta), std::sin(theta));
  return {(x[0] * rot).imag(), (x[1] * rot).imag(), (x[2] * rot).imag()};
}

PhasorSolution passive_steady_state(const PlantParams& p, double omega, double vin_pk,
                                    double iload_pk) {
  if (!p.composites_ready) throw std::invalid_argument("passive_steady_state: derive composites first");

  using C = std::complex<double>;
  const C j(0.0, 1.0);
  // Positive-sequence phasors matching source_waveforms (b lags a by 2*pi/3).
  Eigen::Vector3cd seq;
  seq << C(1, 0), C(-0.5, -kSqrt3Half), C(-0.5, kSqrt3Half);
  const Eigen::Vector3cd vin = vin_pk * seq;
  const Eigen::Vector3cd il = iload_pk * seq;

  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  const Eigen::Matrix3cd r = p.r_load.cast<C>();
  const Eigen::Matrix3cd lm = p.l_load.cast<C>();

  Eigen::Matrix<C, 9, 9> a = Eigen::Matrix<C, 9, 9>::Zero();
  Eigen::Matrix<C, 9, 1> b;

  // (j w lbar1 + rbar1 + b^2 R) I1 - b R I2 + b R I3 = -b R Il - a b Vin
  a.block<3, 3>(0, 0) = (j * omega * p.lbar1 + p.rbar1) * id + p.beta * p.beta * r;
  a.block<3, 3>(0, 3) = -p.beta * r;
  a.block<3, 3>(0, 6) = p.beta * r;
  b.segment<3>(0) = -p.beta * (r * il) - p.alpha * p.beta * vin;
  // -b R I1 + (j w l2 I + rbar2) I2 - R I3 = R Il
  a.block<3, 3>(3, 0) = -p.beta * r;
  a.block<3, 3>(3, 3) = j * omega * p.l2 * id + p.rbar2.cast<C>();
  a.block<3, 3>(3, 6) = -r;
  b.segment<3>(3) = r * il;
  // b R I1 - R I2 + (j w L + R) I3 = -R Il
  a.block<3, 3>(6, 0) = p.beta * r;
  a.block<3, 3>(6, 3) = -r;
  a.block<3, 3>(6, 6) = j * omega * lm + r;
  b.segment<3>(6) = -(r * il);

  Eigen::FullPivLU<Eigen::Matrix<C, 9, 9>> lu(a);
  if (!lu.isInvertible()) throw std::invalid_argument("passive_steady_state: singular phasor system");
  const Eigen::Matrix<C, 9, 1> x = lu.solve(b);

  PhasorSolution sol;
  sol.i1 = x.segment<3>(0);
  sol.i2 = x.segment<3>(3);
  sol.i3 = x.segment<3>(6);
  sol.v = r * (-p.beta * sol.i1 + sol.i2 - sol.i3 - il);
  return sol;
}

}  // namespace hdt
