#pragma once
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kerr/field.hpp"
#include "kerr/geometry.hpp"
#include "kerr/radial.hpp"
#include "kerr/spectral.hpp"

namespace kerr {

// Wave packet of scale L > 0: a carrier under the receding envelope
//   eta_L(u) = eta((u - L^2)/L) / sqrt(L),  supp eta_L = [L^2 - L, L^2 + L].
// The 1/sqrt(L) normalization keeps the envelope's L^2 norm fixed while the
// packet moves out, so <Psi0, Psi0> approaches an L-independent limit; the
// finite-L remainder is the envelope-derivative energy <eta'^2>/L^2, which
// dominates unless the carrier satisfies 2 wt^2 L^2 >> <eta'^2>/<eta^2>.
struct WavePacketSpec {
  int k = 1;
  std::size_t n_tilde = 1;  // seed angular line (1-based)
  // carrier frequency; NaN resolves to omega0/2, the superradiant midpoint
  double omega_tilde = std::numeric_limits<double>::quiet_NaN();
  cplx c_in = 1.0;   // amplitude of e^{-i wt u} (1,  wt)
  cplx c_out = 0.0;  // amplitude of e^{+i wt u} (1, -wt)
  double L = 6.0;
  // envelope profile on (-1, 1), default exp(1 - 1/(1 - x^2)) with eta(0)=1;
  // eta_d is its derivative (closed form for the default, else symmetric
  // difference at 1e-6)
  std::function<double(double)> eta;
  std::function<double(double)> eta_d;
};

double carrier_frequency(const WavePacketSpec& spec, const KerrBackground& bg);

// Psi0 = Theta_{nt,wt}(costheta) * (eta_L(u)/sqrt(r^2+a^2)) *
//        [c_in e^{-i wt u} (1, wt) + c_out e^{+i wt u} (1, -wt)],
// with the exact derivative planes filled in.  Throws std::invalid_argument
// when the support [L^2 - L, L^2 + L] is not strictly inside the u grid or
// the grid resolves the carrier wavelength 2 pi/|wt| with fewer than 16
// points.
FieldState build_wavepacket(const WavePacketSpec& spec, const KerrBackground& bg,
                            const std::vector<double>& u_grid,
                            const std::vector<double>& costheta_grid);

// Scattering quadratic form of one (n, omega) channel in the basis
// (phi_grave, conj phi_grave):
//   (1/(omega Omega)) sum_ab t_ab phi_a(u) phi_b(v)
//     = < (phi_grave, conj phi_grave)(u), U (phi_grave, conj phi_grave)(v) >,
// phi_1 = Re phi_acute, phi_2 = Im phi_acute, and the split U = U_+ - U_-
// into positive semidefinite parts with U_- supported exactly on the
// superradiant set omega * Omega < 0 (where |alpha/beta| > 1).
struct UMatrices {
  Eigen::Matrix2cd U, U_plus, U_minus;
};

// Throws std::domain_error at the excluded frequencies (|omega| or |Omega|
// under the 1e-8 floor) and std::invalid_argument when omega does not match
// the transmission data.
UMatrices u_matrix(const Transmission& tr, double omega);

struct SuperradianceConfig {
  double t_end = 20.0;
  double R = 0.0;            // exterior boundary; <= 0 resolves to 1.2 r1
  double u_min = -40.0;      // horizon-side grid edge (at most; see below)
  double du = 0.1;           // target spacing, shrunk to resolve the carrier
  std::size_t ncostheta = 20;
  double grid_buffer = 10.0; // grid headroom beyond the causal reach
  double cfl_safety = 0.5;
  SynthesisConfig spectral;  // projection/split controls (W auto when 0)
};

struct SuperradianceRun {
  double L = 0.0;
  double omega_tilde = 0.0;
  bool superradiant = false;     // omega_tilde strictly between 0 and omega0
  double total_energy = 0.0;     // <Psi0, Psi0>
  double exterior_energy = 0.0;  // beyond R at t_end
  double amplification = 0.0;    // exterior_energy / total_energy
  double low_energy = 0.0;       // E<_N of the energy split
  double split_J = 0.0;
  double flux_ratio = 0.0;       // |alpha/beta|^2 at (omega_tilde, n_tilde)
  std::vector<double> flux_ratio_by_mode;  // n = 1 .. n_max at omega_tilde
  std::vector<double> mode_energy;         // spectral-measure mass per line
  std::vector<double> tail_energy;         // [i] = sum over lines n >= i+1
};

// One run per spec: build the packet on a grid sized to its support plus the
// causal reach of t_end, project it, split its energy, evolve it, and report
// the exterior energy beyond R.  Runs are independent of each other.
std::vector<SuperradianceRun> superradiance_experiment(
    const std::vector<WavePacketSpec>& specs, const KerrBackground& bg,
    const SuperradianceConfig& cfg);

// JSON array of the per-run records (tail_energy index i means n0 = i+1).
std::string superradiance_json(const std::vector<SuperradianceRun>& runs);

}  // namespace kerr
