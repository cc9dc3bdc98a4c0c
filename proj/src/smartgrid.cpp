#include "polycert/smartgrid.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "polycert/util.hpp"

namespace polycert {

Eigen::MatrixXd ThermalModel::step_matrix() const {
  double c = alpha * dt_hours * 3600.0 / (dx * dx);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i) {
    A(i, i) = 1.0 - 2.0 * c;
    if (i > 0) A(i, i - 1) = c;
    if (i + 1 < M) A(i, i + 1) = c;
  }
  return A;
}

Eigen::VectorXd ThermalModel::input_vector() const {
  double c = alpha * dt_hours * 3600.0 / (dx * dx);
  Eigen::VectorXd B = Eigen::VectorXd::Zero(M);
  if (M > 0) {
    B[0] += c;
    B[M - 1] += c;
  }
  return B;
}

Eigen::VectorXd ThermalModel::step_dynamics(const Eigen::VectorXd& T,
                                            double u) const {
  if (M == 0) return T;
  return step_matrix() * T + input_vector() * u;
}

double ThermalModel::consumption(int k, double u, double T1, double Q_k) const {
  double load_w = (Te[size_t(k)] - u) / Re;
  if (M > 0) load_w += 2.0 * Cin * (T1 - u) / dx;
  double load_kw = std::max(0.0, load_w / 1000.0);
  return load_kw - Q_k;
}

bool PricePlan::on_peak(int k, double dt_hours) const {
  double hour = std::fmod(double(k) * dt_hours, 24.0);
  return hour >= t_on && hour < t_off;
}

namespace {

struct StateGrid {
  double lo = 0.0, hi = 1.0;
  int n = 1;

  double value(int idx) const {
    if (n == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * double(idx) / double(n - 1);
  }
  int snap(double v) const {
    if (n == 1) return 0;
    double t = (v - lo) / (hi - lo) * double(n - 1);
    int idx = int(std::lround(t));
    return std::min(n - 1, std::max(0, idx));
  }
};

// mixed-radix index over M wall temperatures
struct StateSpace {
  StateGrid grid;
  int M = 0;
  long long states = 1;

  explicit StateSpace(const StateGrid& g, int M_) : grid(g), M(M_) {
    states = 1;
    for (int i = 0; i < M; ++i) states *= g.n;
  }
  Eigen::VectorXd decode(long long idx) const {
    Eigen::VectorXd T(M);
    for (int i = M - 1; i >= 0; --i) {
      T[i] = grid.value(int(idx % grid.n));
      idx /= grid.n;
    }
    return T;
  }
  long long encode_snapped(const Eigen::VectorXd& T) const {
    long long idx = 0;
    for (int i = 0; i < M; ++i) idx = idx * grid.n + grid.snap(T[i]);
    return idx;
  }
};

double stage_price(const PricePlan& plan, int k, double dt) {
  return plan.on_peak(k, dt) ? plan.p_on : plan.p_off;
}

}  // namespace

Schedule evaluate_schedule(const ThermalModel& model, const PricePlan& plan,
                           const std::vector<double>& u,
                           const std::vector<double>* solar) {
  // trajectory snapped to the same state grid the DP tables use, so
  // open-loop strategies and DP schedules are billed under one model
  DpGrid grid;
  StateGrid sg{model.Tmin, model.Tmax, model.M > 0 ? grid.n_state : 1};
  StateSpace space(sg, model.M);
  const Eigen::MatrixXd F = model.step_matrix();
  const Eigen::VectorXd Bv = model.input_vector();
  Schedule s;
  s.u = u;
  long long idx =
      model.M > 0
          ? space.encode_snapped(Eigen::VectorXd::Constant(model.M, model.Tinit))
          : 0;
  double peak = 0.0;
  for (int k = 0; k < model.steps(); ++k) {
    Eigen::VectorXd T = model.M > 0 ? space.decode(idx) : Eigen::VectorXd();
    double t1 = model.M > 0 ? T[0] : u[size_t(k)];
    double q = solar ? (*solar)[size_t(k)] : 0.0;
    double g = model.consumption(k, u[size_t(k)], t1, q);
    s.g_kw.push_back(g);
    s.wall.push_back(T);
    s.energy_cost += stage_price(plan, k, model.dt_hours) * g * model.dt_hours;
    if (plan.on_peak(k, model.dt_hours)) peak = std::max(peak, g);
    if (model.M > 0) idx = space.encode_snapped(F * T + Bv * u[size_t(k)]);
  }
  s.peak_kw = peak;
  s.demand_cost = plan.p_d / plan.proration * peak;
  s.bill = s.energy_cost + s.demand_cost;
  return s;
}

DpResult dp_solve(const ThermalModel& model, const PricePlan& plan,
                  double gamma, const DpGrid& grid,
                  const std::vector<double>* solar) {
  const int Nf = model.steps();
  StateGrid sg{model.Tmin, model.Tmax, model.M > 0 ? grid.n_state : 1};
  StateGrid ug{model.Tmin, model.Tmax, grid.n_input};
  StateSpace space(sg, model.M);
  const Eigen::MatrixXd F = model.step_matrix();
  const Eigen::VectorXd Bv = model.input_vector();

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> V(static_cast<size_t>(space.states),
                        plan.p_d / plan.proration * gamma);
  std::vector<std::vector<int>> policy(
      static_cast<size_t>(Nf),
      std::vector<int>(static_cast<size_t>(space.states), -1));

  for (int k = Nf - 1; k >= 0; --k) {
    std::vector<double> Vnext(static_cast<size_t>(space.states), inf);
    bool onpk = plan.on_peak(k, model.dt_hours);
    double price = stage_price(plan, k, model.dt_hours);
    double q = solar ? (*solar)[size_t(k)] : 0.0;
    for (long long sidx = 0; sidx < space.states; ++sidx) {
      Eigen::VectorXd T = space.decode(sidx);
      double best = inf;
      int best_u = -1;
      for (int ui = 0; ui < ug.n; ++ui) {
        double u = ug.value(ui);
        double t1 = model.M > 0 ? T[0] : u;
        double g = model.consumption(k, u, t1, q);
        if (onpk && g > gamma) continue;  // admissible set W_{gamma,k}
        long long nxt =
            model.M > 0 ? space.encode_snapped(F * T + Bv * u) : 0;
        double cost =
            price * g * model.dt_hours + V[static_cast<size_t>(nxt)];
        if (cost < best) {
          best = cost;
          best_u = ui;
        }
      }
      Vnext[static_cast<size_t>(sidx)] = best;
      policy[size_t(k)][static_cast<size_t>(sidx)] = best_u;
    }
    V.swap(Vnext);
  }

  DpResult res;
  Eigen::VectorXd T0 =
      Eigen::VectorXd::Constant(std::max(model.M, 1), model.Tinit);
  long long start = model.M > 0 ? space.encode_snapped(T0) : 0;
  res.value = V[static_cast<size_t>(start)];
  res.feasible = std::isfinite(res.value);
  if (!res.feasible) return res;

  // forward pass through the stored policy
  std::vector<double> u_seq;
  long long cur = start;
  for (int k = 0; k < Nf; ++k) {
    int ui = policy[size_t(k)][static_cast<size_t>(cur)];
    if (ui < 0) {
      res.feasible = false;
      return res;
    }
    double u = ug.value(ui);
    u_seq.push_back(u);
    if (model.M > 0) {
      Eigen::VectorXd T = space.decode(cur);
      cur = space.encode_snapped(F * T + Bv * u);
    }
  }
  // realized trajectory uses the same snapped dynamics as the recursion
  Schedule s;
  s.u = u_seq;
  long long idx = start;
  double peak = 0.0;
  for (int k = 0; k < Nf; ++k) {
    Eigen::VectorXd T = space.decode(idx);
    double t1 = model.M > 0 ? T[0] : u_seq[size_t(k)];
    double q = solar ? (*solar)[size_t(k)] : 0.0;
    double g = model.consumption(k, u_seq[size_t(k)], t1, q);
    s.g_kw.push_back(g);
    s.wall.push_back(model.M > 0 ? T : Eigen::VectorXd());
    s.energy_cost += stage_price(plan, k, model.dt_hours) * g * model.dt_hours;
    if (plan.on_peak(k, model.dt_hours)) peak = std::max(peak, g);
    if (model.M > 0) idx = space.encode_snapped(F * T + Bv * u_seq[size_t(k)]);
  }
  s.peak_kw = peak;
  s.demand_cost = plan.p_d / plan.proration * peak;
  s.bill = s.energy_cost + s.demand_cost;
  res.schedule = std::move(s);
  return res;
}

DpResult dp_brute_force(const ThermalModel& model, const PricePlan& plan,
                        double gamma, const DpGrid& grid) {
  const int Nf = model.steps();
  StateGrid sg{model.Tmin, model.Tmax, model.M > 0 ? grid.n_state : 1};
  StateGrid ug{model.Tmin, model.Tmax, grid.n_input};
  StateSpace space(sg, model.M);
  const Eigen::MatrixXd F = model.step_matrix();
  const Eigen::VectorXd Bv = model.input_vector();
  const double inf = std::numeric_limits<double>::infinity();

  DpResult res;
  res.value = inf;
  std::vector<int> seq(static_cast<size_t>(Nf), 0);
  std::vector<double> best_seq;
  // enumerate all n_input^Nf sequences; cost accumulated backward so the
  // floating-point operations match the recursion exactly
  std::function<void()> eval = [&] {
    long long idx =
        model.M > 0
            ? space.encode_snapped(Eigen::VectorXd::Constant(model.M, model.Tinit))
            : 0;
    std::vector<double> stage(static_cast<size_t>(Nf), 0.0);
    bool ok = true;
    for (int k = 0; k < Nf && ok; ++k) {
      double u = ug.value(seq[size_t(k)]);
      Eigen::VectorXd T = model.M > 0 ? space.decode(idx) : Eigen::VectorXd();
      double t1 = model.M > 0 ? T[0] : u;
      double g = model.consumption(k, u, t1);
      if (plan.on_peak(k, model.dt_hours) && g > gamma) ok = false;
      stage[size_t(k)] = stage_price(plan, k, model.dt_hours) * g * model.dt_hours;
      if (model.M > 0) idx = space.encode_snapped(F * T + Bv * u);
    }
    if (!ok) return;
    double cost = plan.p_d / plan.proration * gamma;
    for (int k = Nf - 1; k >= 0; --k) cost = stage[size_t(k)] + cost;
    if (cost < res.value) {
      res.value = cost;
      best_seq.clear();
      for (int v : seq) best_seq.push_back(ug.value(v));
    }
  };
  std::function<void(int)> rec = [&](int k) {
    if (k == Nf) {
      eval();
      return;
    }
    for (int ui = 0; ui < ug.n; ++ui) {
      seq[size_t(k)] = ui;
      rec(k + 1);
    }
  };
  rec(0);
  res.feasible = std::isfinite(res.value);
  if (res.feasible) res.schedule.u = best_seq;
  return res;
}

ThermostatResult thermostat_optimize(const ThermalModel& model,
                                     const PricePlan& plan, const DpGrid& grid,
                                     int b_max,
                                     const std::vector<double>* solar) {
  // upper bracket: worst-case consumption at the coldest setpoint
  double gamma_hi = 1.0;
  for (int k = 0; k < model.steps(); ++k)
    gamma_hi = std::max(gamma_hi,
                        model.consumption(k, model.Tmin, model.Tmax, 0.0));
  gamma_hi *= 1.05;

  ThermostatResult out;
  DpResult top = dp_solve(model, plan, gamma_hi, grid, solar);
  if (!top.feasible) return out;

  // feasibility bisection on gamma; feasibility is monotone, asserted here
  double lo = 0.0, hi = gamma_hi;
  bool seen_infeasible = false;
  for (int it = 0; it < b_max; ++it) {
    double mid = 0.5 * (lo + hi);
    DpResult r = dp_solve(model, plan, mid, grid, solar);
    if (r.feasible) {
      if (seen_infeasible && mid < lo)
        throw Error("thermostat bisection: feasibility flipped");
      hi = mid;
    } else {
      seen_infeasible = true;
      lo = mid;
    }
    ++out.bisection_iterations;
  }
  double gamma_min = hi;

  // scan the bracket for the bill-optimal peak bound: the joint problem
  // minimizes J_e + (p_d / proration) * gamma over gamma as well
  double best_bill = std::numeric_limits<double>::infinity();
  double best_gamma = gamma_hi;
  Schedule best_schedule = top.schedule;
  const int scan_points = 25;
  for (int i = 0; i < scan_points; ++i) {
    double gamma =
        gamma_min + (gamma_hi - gamma_min) * double(i) / (scan_points - 1);
    DpResult r = dp_solve(model, plan, gamma, grid, solar);
    if (!r.feasible) continue;
    Schedule realized = evaluate_schedule(model, plan, r.schedule.u, solar);
    if (realized.bill < best_bill - 1e-12) {
      best_bill = realized.bill;
      best_gamma = std::max(gamma, realized.peak_kw);
      best_schedule = realized;
    }
  }
  out.feasible = true;
  out.gamma = best_gamma;
  out.schedule = best_schedule;
  return out;
}

FourSetpointResult four_setpoint_optimize(const ThermalModel& model,
                                          const PricePlan& plan,
                                          const DpGrid& grid, int n_samples,
                                          uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int Nf = model.steps();
  StateGrid sg{model.Tmin, model.Tmax, model.M > 0 ? grid.n_state : 1};
  StateGrid ug{model.Tmin, model.Tmax, grid.n_input};
  StateSpace space(sg, model.M);
  const Eigen::MatrixXd F = model.step_matrix();
  const Eigen::VectorXd Bv = model.input_vector();
  std::uniform_real_distribution<double> th(0.0, 24.0);

  FourSetpointResult out;
  out.bill = std::numeric_limits<double>::infinity();
  for (int sample = 0; sample < n_samples; ++sample) {
    std::array<double, 3> t{th(rng), th(rng), th(rng)};
    std::sort(t.begin(), t.end());
    std::vector<int> period_of(static_cast<size_t>(Nf));
    for (int k = 0; k < Nf; ++k) {
      double hour = std::fmod(double(k) * model.dt_hours, 24.0);
      period_of[size_t(k)] = hour < t[0] ? 0 : hour < t[1] ? 1 : hour < t[2] ? 2 : 3;
    }
    // enumerate setpoints period by period, carrying the snapped state,
    // accumulated energy cost and running on-peak peak
    std::array<int, 4> ui{};
    std::array<int, 4> best_ui{};
    double best_bill = std::numeric_limits<double>::infinity();
    std::function<void(int, int, long long, double, double)> rec =
        [&](int period, int k, long long idx, double energy, double peak) {
          if (k == Nf || period_of[size_t(k)] != period) {
            if (period == 3 || k == Nf) {
              double bill = energy + plan.p_d / plan.proration * peak;
              if (bill < best_bill) {
                best_bill = bill;
                best_ui = ui;
              }
              return;
            }
            for (int v = 0; v < ug.n; ++v) {
              ui[size_t(period + 1)] = v;
              rec(period + 1, k, idx, energy, peak);
            }
            return;
          }
          double u = ug.value(ui[size_t(period)]);
          Eigen::VectorXd T = model.M > 0 ? space.decode(idx) : Eigen::VectorXd();
          double t1 = model.M > 0 ? T[0] : u;
          double g = model.consumption(k, u, t1);
          double e2 = energy + stage_price(plan, k, model.dt_hours) * g * model.dt_hours;
          double p2 = plan.on_peak(k, model.dt_hours) ? std::max(peak, g) : peak;
          long long nxt = model.M > 0 ? space.encode_snapped(F * T + Bv * u) : 0;
          rec(period, k + 1, nxt, e2, p2);
        };
    long long start =
        model.M > 0
            ? space.encode_snapped(Eigen::VectorXd::Constant(model.M, model.Tinit))
            : 0;
    for (int v = 0; v < ug.n; ++v) {
      ui[0] = v;
      rec(0, 0, start, 0.0, 0.0);
    }
    if (best_bill < out.bill) {
      out.bill = best_bill;
      out.switch_hours = t;
      for (int p = 0; p < 4; ++p)
        out.setpoints[size_t(p)] = ug.value(best_ui[size_t(p)]);
      std::vector<double> u_seq(static_cast<size_t>(Nf));
      for (int k = 0; k < Nf; ++k)
        u_seq[size_t(k)] = out.setpoints[size_t(period_of[size_t(k)])];
      out.schedule = evaluate_schedule(model, plan, u_seq);
      out.bill = out.schedule.bill;
    }
  }
  return out;
}

double CostModel::cost(const std::vector<double>& s_kw, const PricePlan& plan,
                       double dt_hours) const {
  double energy_kwh = 0.0;
  double peak = 0.0;
  for (int k = 0; k < int(s_kw.size()); ++k) {
    energy_kwh += s_kw[size_t(k)] * dt_hours;
    if (plan.on_peak(k, dt_hours)) peak = std::max(peak, s_kw[size_t(k)]);
  }
  if (quadratic) return tau * energy_kwh * energy_kwh + nu * energy_kwh + b * peak;
  return a * energy_kwh + b * peak;
}

namespace {

struct VertexEval {
  PricePlan prices;
  double cost = 0.0;
  double revenue = 0.0;
  std::vector<double> s_kw;
  std::vector<Schedule> schedules;
};

VertexEval evaluate_prices(const std::vector<UserGroup>& users,
                           const CostModel& cost_model, double lambda,
                           PricePlan prices, const DpGrid& grid) {
  VertexEval ev;
  prices.p_on = std::max(prices.p_on, 1e-6);
  prices.p_off = std::max(prices.p_off, 1e-6);
  prices.p_d = std::max(prices.p_d, 1e-6);
  const int Nf = users.front().model.steps();
  ev.s_kw.assign(static_cast<size_t>(Nf), 0.0);
  double revenue = 0.0;
  for (const auto& user : users) {
    ThermostatResult r = thermostat_optimize(
        user.model, prices, grid, 20,
        user.solar.empty() ? nullptr : &user.solar);
    if (!r.feasible) {
      ev.cost = std::numeric_limits<double>::infinity();
      return ev;
    }
    for (int k = 0; k < Nf; ++k)
      ev.s_kw[size_t(k)] += user.count * r.schedule.g_kw[size_t(k)];
    revenue += user.count * r.schedule.bill;
    ev.schedules.push_back(r.schedule);
  }
  ev.cost = cost_model.cost(ev.s_kw, prices, users.front().model.dt_hours);
  // uniform rescaling enforces C = lambda * revenue exactly: the optimal
  // schedules are invariant under a uniform scaling of all three prices
  double kappa = ev.cost / std::max(lambda * revenue, 1e-12);
  prices.p_on *= kappa;
  prices.p_off *= kappa;
  prices.p_d *= kappa;
  for (auto& s : ev.schedules) {
    s.energy_cost *= kappa;
    s.demand_cost *= kappa;
    s.bill *= kappa;
  }
  revenue *= kappa;
  ev.revenue = revenue;
  ev.prices = prices;
  return ev;
}

}  // namespace

PricingResult utility_optimize(const std::vector<UserGroup>& users,
                               const CostModel& cost, double lambda,
                               const PricePlan& initial, const DpGrid& grid,
                               const NelderMeadParams& params) {
  // simplex over (p_off, p_on, p_d)
  auto to_vec = [](const PricePlan& p) {
    return Eigen::Vector3d(p.p_off, p.p_on, p.p_d);
  };
  auto to_plan = [&](const Eigen::Vector3d& v) {
    PricePlan p = initial;
    p.p_off = v[0];
    p.p_on = v[1];
    p.p_d = v[2];
    return p;
  };
  std::vector<Eigen::Vector3d> vertex(4);
  vertex[0] = to_vec(initial);
  vertex[1] = vertex[0].cwiseProduct(Eigen::Vector3d(1.4, 1.0, 1.0));
  vertex[2] = vertex[0].cwiseProduct(Eigen::Vector3d(1.0, 1.4, 1.0));
  vertex[3] = vertex[0].cwiseProduct(Eigen::Vector3d(1.0, 1.0, 1.4));

  std::vector<VertexEval> evals(4);
  for (int i = 0; i < 4; ++i)
    evals[size_t(i)] =
        evaluate_prices(users, cost, lambda, to_plan(vertex[size_t(i)]), grid);

  PricingResult out;
  int iter = 0;
  for (; iter < params.max_iter; ++iter) {
    // order by cost
    std::vector<int> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return evals[size_t(a)].cost < evals[size_t(b)].cost;
    });
    std::vector<Eigen::Vector3d> vtx(4);
    std::vector<VertexEval> evs(4);
    for (int i = 0; i < 4; ++i) {
      vtx[size_t(i)] = vertex[size_t(order[size_t(i)])];
      evs[size_t(i)] = evals[size_t(order[size_t(i)])];
    }
    vertex = vtx;
    evals = evs;

    double spread = 0.0;
    for (int i = 1; i < 4; ++i)
      spread = std::max(spread, (vertex[size_t(i)] - vertex[0]).norm() /
                                    std::max(1.0, vertex[0].norm()));
    if (spread < params.tol) {
      out.converged = true;
      break;
    }

    Eigen::Vector3d centroid =
        (vertex[0] + vertex[1] + vertex[2]) / 3.0;
    Eigen::Vector3d reflected =
        centroid + params.reflection * (centroid - vertex[3]);
    reflected = reflected.cwiseMax(1e-6);
    VertexEval er = evaluate_prices(users, cost, lambda, to_plan(reflected), grid);
    if (er.cost < evals[0].cost) {
      Eigen::Vector3d expanded =
          centroid + params.expansion * (centroid - vertex[3]);
      expanded = expanded.cwiseMax(1e-6);
      VertexEval ee =
          evaluate_prices(users, cost, lambda, to_plan(expanded), grid);
      if (ee.cost < er.cost) {
        vertex[3] = expanded;
        evals[3] = ee;
      } else {
        vertex[3] = reflected;
        evals[3] = er;
      }
    } else if (er.cost < evals[2].cost) {
      vertex[3] = reflected;
      evals[3] = er;
    } else {
      Eigen::Vector3d contracted =
          centroid + params.contraction * (vertex[3] - centroid);
      VertexEval ec =
          evaluate_prices(users, cost, lambda, to_plan(contracted), grid);
      if (ec.cost < evals[3].cost) {
        vertex[3] = contracted;
        evals[3] = ec;
      } else {
        for (int i = 1; i < 4; ++i) {
          vertex[size_t(i)] =
              vertex[0] + params.reduction * (vertex[size_t(i)] - vertex[0]);
          evals[size_t(i)] = evaluate_prices(users, cost, lambda,
                                             to_plan(vertex[size_t(i)]), grid);
        }
      }
    }
  }

  const VertexEval& best = evals[0];
  out.prices = best.prices;
  out.production_cost = best.cost;
  out.revenue = best.revenue;
  out.balance_residual =
      std::abs(best.cost - lambda * best.revenue) / std::max(best.cost, 1e-12);
  out.s_kw = best.s_kw;
  out.user_schedules = best.schedules;
  out.iterations = iter;
  return out;
}

std::vector<double> load_te_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open temperature file " + path);
  std::vector<double> te;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    te.push_back(std::stod(line.substr(comma + 1)));
  }
  return te;
}

std::string schedule_csv(const ThermalModel& model, const Schedule& s) {
  std::ostringstream out;
  out << "hour,u,g_kw";
  for (int i = 0; i < model.M; ++i) out << ",T" << (i + 1);
  out << "\n";
  for (size_t k = 0; k < s.u.size(); ++k) {
    out << double(k) * model.dt_hours << "," << s.u[k] << "," << s.g_kw[k];
    for (int i = 0; i < model.M; ++i)
      out << "," << (int(s.wall[k].size()) > i ? s.wall[k][i] : 0.0);
    out << "\n";
  }
  return out.str();
}

}  // namespace polycert
