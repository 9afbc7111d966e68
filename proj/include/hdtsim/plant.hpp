#pragma once

#include <complex>

#include <Eigen/Dense>

#include "hdtsim/phase_math.hpp"

namespace hdt {

/// Circuit constants of the averaged converter-transformer model. Scalar
/// impedances act as scalar*Identity next to the 3x3 load matrices (all
/// branches except the load are balanced). Composite fields are filled by
/// derive_composites() and must not be edited by hand.
struct PlantParams {
  double l1 = 0.0063;    // VSC1 filter inductance, H
  double l2 = 0.2;       // VSC2 filter inductance, H
  double lp = 0.795;     // grid transformer primary inductance, H
  double ls = 2e-4;      // grid transformer secondary inductance, H
  double r1 = 0.033;     // ohm
  double r2 = 0.01;      // ohm
  double rp = 50.0;      // ohm
  double rs = 0.01;      // ohm
  double c = 0.0018;     // DC-link capacitance, F
  double alpha = 1.0 / 66.0;  // grid-side turns ratio (step-down)
  double beta = 18.0;         // series transformer turns ratio
  Eigen::Matrix3d r_load = Eigen::Matrix3d::Identity() * 10.0;     // ohm
  Eigen::Matrix3d l_load = Eigen::Matrix3d::Identity() * 8.3e-2;   // H

  // Derived composites (see derive_composites).
  double lbar1 = 0.0;
  double rbar1 = 0.0;
  Eigen::Matrix3d rbar2 = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d l_load_inv = Eigen::Matrix3d::Zero();
  bool composites_ready = false;
};

/// Dynamic state: the three branch currents and the DC-link voltage.
struct PlantState {
  ThreePhase i1;  // current exiting VSC1, A
  ThreePhase i2;  // current exiting VSC2, A
  ThreePhase i3;  // load inductor current, A
  double vc = 0.0;  // DC-link capacitor voltage, V
};

/// Exogenous drive: grid voltage, constant-current load draw (positive =
/// absorption), and grid frequency.
struct ExogenousInputs {
  ThreePhase vin;
  ThreePhase iload;
  double f = 50.0;
};

/// Averaged converter commands, componentwise in [-1, 1].
struct DutyPair {
  ThreePhase d1;
  ThreePhase d2;
};

/// Validates the raw constants and fills the composite fields:
///   lbar1 = l1 + beta^2 (ls + alpha^2 lp)
///   rbar1 = r1 + beta^2 (rs + alpha^2 rp)
///   rbar2 = r2*I + r_load
/// Throws std::invalid_argument on violated invariants (non-positive
/// inductances, asymmetric or non-SPD load matrices, singular l_load).
PlantParams derive_composites(PlantParams raw);

/// Voltage at the load terminals: r_load * (-beta i1 + i2 - i3 - iload).
ThreePhase load_voltage(const PlantState& s, const ExogenousInputs& u, const PlantParams& p);

/// Current injected by the secondary of the grid-side series transformer:
/// -beta * i1.
ThreePhase grid_current(const PlantState& s, const PlantParams& p);

/// State derivative of the averaged model (per-second units). Composites must
/// be derived; duties are assumed already limited to [-1, 1].
PlantState derivative(const PlantState& s, const ExogenousInputs& u, const DutyPair& d,
                      const PlantParams& p);

/// Positive-sequence source waveforms aligned with the d axis of the rotating
/// frame: park(theta, vin) = [vin_pk, 0, 0]. The load current source shares
/// the template (purely active draw).
void source_waveforms(double theta, double vin_pk, double iload_pk, ThreePhase& vin,
                      ThreePhase& iload);

/// Sinusoidal steady state of the passive circuit (both duties zero; the
/// DC link decouples). Complex per-phase phasors X with x(t) = Im(X e^{j th}).
/// Serves as an independent oracle for the time-domain integrator.
struct PhasorSolution {
  Eigen::Vector3cd i1;
  Eigen::Vector3cd i2;
  Eigen::Vector3cd i3;
  Eigen::Vector3cd v;  // load terminal voltage

  /// Instantaneous abc value of one phasor triple at angle theta.
  static ThreePhase at(const Eigen::Vector3cd& x, double theta);
};

PhasorSolution passive_steady_state(const PlantParams& p, double omega, double vin_pk,
                                    double iload_pk);

}  // namespace hdt
