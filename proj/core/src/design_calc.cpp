#include "dtmfdrive/design_calc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::design {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

void require_threshold(double vdd, double v_tst) {
  require_positive(vdd, "Vdd");
  require_positive(v_tst, "Vtst");
  if (v_tst >= vdd) throw ConfigError("Vtst must be below Vdd");
}

}  // namespace

void GuardNetwork::validate() const {
  require_positive(r1_ohm, "R1");
  require_positive(c_farad, "C");
  require_threshold(vdd_volt, v_tst_volt);
  if (arrangement != Arrangement::single) require_positive(r2_ohm, "R2");
}

double guard_time(double r_ohm, double c_farad, double vdd_volt, double v_tst_volt) {
  require_positive(r_ohm, "R");
  require_positive(c_farad, "C");
  require_threshold(vdd_volt, v_tst_volt);
  return r_ohm * c_farad * std::log(vdd_volt / v_tst_volt);
}

double guard_time_discharge(double r_ohm, double c_farad, double vdd_volt, double v_tst_volt) {
  require_positive(r_ohm, "R");
  require_positive(c_farad, "C");
  require_threshold(vdd_volt, v_tst_volt);
  return r_ohm * c_farad * std::log(vdd_volt / (vdd_volt - v_tst_volt));
}

GuardTimes guard_times(const GuardNetwork& net) {
  net.validate();
  const double r1 = net.r1_ohm;
  const double rp = net.arrangement == GuardNetwork::Arrangement::single
                        ? r1
                        : parallel_resistance(net.r1_ohm, net.r2_ohm);
  const double gtp_r = net.arrangement == GuardNetwork::Arrangement::gtp_shorter ? rp : r1;
  const double gta_r = net.arrangement == GuardNetwork::Arrangement::gtp_longer ? rp : r1;
  return {guard_time_discharge(gtp_r, net.c_farad, net.vdd_volt, net.v_tst_volt),
          guard_time(gta_r, net.c_farad, net.vdd_volt, net.v_tst_volt)};
}

double parallel_resistance(double r1_ohm, double r2_ohm) {
  require_positive(r1_ohm, "R1");
  require_positive(r2_ohm, "R2");
  return r1_ohm * r2_ohm / (r1_ohm + r2_ohm);
}

double input_impedance(double r_ohm, double c_farad, double f_hz) {
  require_positive(r_ohm, "R");
  require_positive(c_farad, "C");
  require_positive(f_hz, "f");
  const double xc = 1.0 / (2.0 * std::numbers::pi * f_hz * c_farad);
  return std::hypot(r_ohm, xc);
}

double amplifier_gain_db(double r_f_ohm, double r_ohm, double tau_s, double f_hz) {
  require_positive(r_f_ohm, "Rf");
  require_positive(r_ohm, "R");
  require_positive(tau_s, "tau");
  require_positive(f_hz, "f");
  const double wt = 2.0 * std::numbers::pi * f_hz * tau_s;
  return 20.0 * std::log10(r_f_ohm / r_ohm) + 20.0 * std::log10(wt / std::sqrt(wt * wt + 1.0));
}

double solve_time_constant(double target_atten_db, double f_hz) {
  require_positive(f_hz, "f");
  if (!(target_atten_db < 0.0) || !std::isfinite(target_atten_db)) {
    throw ConfigError("target attenuation must be below 0 dB");
  }
  // g = wt / sqrt(wt^2 + 1)  =>  wt = g / sqrt(1 - g^2)
  const double g = std::pow(10.0, target_atten_db / 20.0);
  const double wt = g / std::sqrt(1.0 - g * g);
  return wt / (2.0 * std::numbers::pi * f_hz);
}

double capacitor_for(double tau_s, double r_ohm) {
  require_positive(tau_s, "tau");
  require_positive(r_ohm, "R");
  return tau_s / r_ohm;
}

double voltage_gain(double r5_ohm, double r1_ohm) {
  require_positive(r5_ohm, "R5");
  require_positive(r1_ohm, "R1");
  return r5_ohm / r1_ohm;
}

}  // namespace dtmfdrive::design
