#pragma once

// Closed-form sizing formulas for the decoder's analog front end and guard
// timing network. All arguments and results are SI base units (ohm, farad,
// second, hertz, volt). Domain violations throw ConfigError.

namespace dtmfdrive::design {

// Steering RC network. Without R2 a single resistor sets both guard times;
// with R2 the diode-steered branch runs through R1 || R2 and shortens one of
// them.
struct GuardNetwork {
  enum class Arrangement { single, gtp_shorter, gtp_longer };

  double r1_ohm = 390e3;
  double r2_ohm = 0.0;  // unused for Arrangement::single
  double c_farad = 100e-9;
  double vdd_volt = 5.0;
  double v_tst_volt = 2.5;
  Arrangement arrangement = Arrangement::single;

  void validate() const;
};

// R C ln(Vdd / Vtst).
double guard_time(double r_ohm, double c_farad, double vdd_volt, double v_tst_volt);
// R C ln(Vdd / (Vdd - Vtst)).
double guard_time_discharge(double r_ohm, double c_farad, double vdd_volt, double v_tst_volt);

// Tone-present guard uses the discharge form, tone-absent the charge form;
// the shortened one sees R1 || R2.
struct GuardTimes {
  double t_gtp_s;
  double t_gta_s;
};
GuardTimes guard_times(const GuardNetwork& net);

double parallel_resistance(double r1_ohm, double r2_ohm);

// |R + 1/(j w C)|.
double input_impedance(double r_ohm, double c_farad, double f_hz);

// 20 log10(Rf/R) + 20 log10(w tau / sqrt((w tau)^2 + 1)).
double amplifier_gain_db(double r_f_ohm, double r_ohm, double tau_s, double f_hz);

// tau for which the high-pass term equals target_atten_db (< 0).
double solve_time_constant(double target_atten_db, double f_hz);

// tau / R.
double capacitor_for(double tau_s, double r_ohm);

double voltage_gain(double r5_ohm, double r1_ohm);

}  // namespace dtmfdrive::design
