#ifndef POLYCERT_SMARTGRID_HPP
#define POLYCERT_SMARTGRID_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace polycert {

// Discretized interior-wall conduction model.
struct ThermalModel {
  int M = 3;               // interior discretization points
  double dx = 0.1;         // m
  double dt_hours = 1.0;   // hr
  double alpha = 8.3e-7;   // m^2/s
  double Re = 0.0015;      // K/W
  double Cin = 45.0;       // W m / K
  double Tmin = 22.0, Tmax = 28.0;
  double Tinit = 25.0;
  std::vector<double> Te;  // exterior temperature per step, length Nf

  int steps() const { return int(Te.size()); }
  // x' = (I + A dt) x + B dt u, A the -2/1 stencil scaled by alpha/dx^2
  Eigen::MatrixXd step_matrix() const;
  Eigen::VectorXd input_vector() const;
  Eigen::VectorXd step_dynamics(const Eigen::VectorXd& T, double u) const;
  // HVAC power in kW at step k (thermal load clamped at zero; Q_k is the
  // locally generated solar power in kW)
  double consumption(int k, double u, double T1, double Q_k = 0.0) const;
};

struct PricePlan {
  double p_on = 0.089;    // $/kWh
  double p_off = 0.044;   // $/kWh
  double p_d = 13.50;     // $/kW, monthly demand price
  double t_on = 12.0;     // hr
  double t_off = 19.0;    // hr
  double proration = 30.0;

  bool on_peak(int k, double dt_hours) const;
};

struct Schedule {
  std::vector<double> u;       // setpoints, one per step
  std::vector<double> g_kw;    // consumption per step
  std::vector<Eigen::VectorXd> wall;  // wall temperatures per step
  double energy_cost = 0.0;    // J_e
  double demand_cost = 0.0;    // J_d
  double bill = 0.0;           // J_e + J_d
  double peak_kw = 0.0;        // max over on-peak steps
};

struct DpGrid {
  int n_state = 13;
  int n_input = 13;
};

struct DpResult {
  bool feasible = false;
  double value = 0.0;  // V_0(T^0)
  Schedule schedule;
};

// Tabular cost-to-go over the discretized state space for a fixed peak
// bound gamma; nearest-grid lookup of the successor state.
DpResult dp_solve(const ThermalModel& model, const PricePlan& plan,
                  double gamma, const DpGrid& grid,
                  const std::vector<double>* solar = nullptr);

// Exhaustive control-sequence enumeration with the same snapped dynamics;
// the oracle for dp_solve on small instances.
DpResult dp_brute_force(const ThermalModel& model, const PricePlan& plan,
                        double gamma, const DpGrid& grid);

struct ThermostatResult {
  bool feasible = false;
  double gamma = 0.0;
  Schedule schedule;
  int bisection_iterations = 0;
};

// Bisection on the on-peak power bound gamma around dp_solve.
ThermostatResult thermostat_optimize(const ThermalModel& model,
                                     const PricePlan& plan, const DpGrid& grid,
                                     int b_max = 25,
                                     const std::vector<double>* solar = nullptr);

struct FourSetpointResult {
  Schedule schedule;
  std::array<double, 4> setpoints{};
  std::array<double, 3> switch_hours{};
  double bill = 0.0;
};

// Monte Carlo over valid switching triples; exhaustive setpoint grid per
// sample; deterministic under a fixed seed.
FourSetpointResult four_setpoint_optimize(const ThermalModel& model,
                                          const PricePlan& plan,
                                          const DpGrid& grid, int n_samples,
                                          uint64_t seed);

// Evaluate a fixed open-loop schedule (used by strategies and tests).
Schedule evaluate_schedule(const ThermalModel& model, const PricePlan& plan,
                           const std::vector<double>& u,
                           const std::vector<double>* solar = nullptr);

struct UserGroup {
  std::string name;
  double count = 1.0;
  ThermalModel model;
  std::vector<double> solar;  // kW per step, empty for none
};

struct CostModel {
  bool quadratic = false;
  double a = 0.0814;     // $/kWh
  double b = 59.76;      // $/kW
  double tau = 0.00401e-6;   // $/(kWh)^2 (printed per (MWh)^2)
  double nu = 4.54351e-3;    // $/kWh (printed per MWh)

  double cost(const std::vector<double>& s_kw, const PricePlan& plan,
              double dt_hours) const;
};

struct NelderMeadParams {
  double reflection = 1.0;   // theta
  double expansion = 2.0;    // kappa
  double contraction = 0.5;  // zeta
  double reduction = 0.5;    // tau
  double tol = 1e-4;
  int max_iter = 100;
};

struct PricingResult {
  PricePlan prices;
  double production_cost = 0.0;
  double revenue = 0.0;
  double balance_residual = 0.0;  // |C - lambda * sum bills| / C
  std::vector<double> s_kw;       // aggregate consumption
  std::vector<Schedule> user_schedules;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead over (p_off, p_on, p_d) with the DP as the inner model and
// uniform rescaling to meet the revenue constraint C = lambda * revenue.
PricingResult utility_optimize(const std::vector<UserGroup>& users,
                               const CostModel& cost, double lambda,
                               const PricePlan& initial, const DpGrid& grid,
                               const NelderMeadParams& params = {});

std::vector<double> load_te_csv(const std::string& path);
std::string schedule_csv(const ThermalModel& model, const Schedule& s);

}  // namespace polycert

#endif
