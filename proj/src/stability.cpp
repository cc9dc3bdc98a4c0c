#include "polycert/stability.hpp"

#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "polycert/util.hpp"

namespace polycert {

using nlohmann::json;

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Unstable: return "unstable";
    default: return "error";
  }
}

std::string StabilityReport::to_json() const {
  json j;
  j["verdict"] = verdict_name(verdict);
  j["bound"] = bound;
  j["settings"] = {{"dp", dp}, {"Dp", Dp},       {"d1", d1},
                   {"d2", d2}, {"delta", delta}, {"iterations", iterations}};
  j["validation"] = {{"samples", validation.samples},
                     {"min_eig_P", validation.min_eig_P},
                     {"max_eig_lyap", validation.max_eig_lyap},
                     {"passed", validation.passed}};
  if (!note.empty()) j["note"] = note;
  j["certificate"] = json::parse(P.to_json());
  return j.dump(2);
}

namespace {

std::vector<double> dirichlet(int l, std::mt19937_64& rng) {
  std::exponential_distribution<double> ed(1.0);
  std::vector<double> p(static_cast<size_t>(l));
  double sum = 0.0;
  for (double& v : p) {
    v = ed(rng);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

SolverOptions solver_options(const PipelineOptions& opts) {
  SolverOptions so;
  so.eps = opts.eps;
  so.max_iter = opts.max_iter;
  so.pool = opts.pool;
  return so;
}

// eigenvalue sweep: true when some sampled A(alpha) has an eigenvalue in
// the closed right half plane
bool sweep_detects_instability(const MatrixPolynomial& A,
                               const std::function<std::vector<double>(
                                   std::mt19937_64&)>& sampler,
                               int samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    auto pt = sampler(rng);
    Eigen::EigenSolver<Eigen::MatrixXd> eig(A.eval(pt));
    if (eig.eigenvalues().real().maxCoeff() > 1e-9) return true;
  }
  return false;
}

}  // namespace

ValidationStats validate_simplex_certificate(const MatrixPolynomial& A,
                                             const MatrixPolynomial& P,
                                             int samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  ValidationStats st;
  st.samples = samples;
  st.min_eig_P = std::numeric_limits<double>::infinity();
  st.max_eig_lyap = -std::numeric_limits<double>::infinity();
  const int l = A.num_vars();
  for (int s = 0; s < samples; ++s) {
    auto pt = dirichlet(l, rng);
    Eigen::MatrixXd Pa = P.eval(pt);
    Eigen::MatrixXd Aa = A.eval(pt);
    Eigen::MatrixXd lyap = Aa.transpose() * Pa + Pa * Aa;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(Pa);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> el(
        0.5 * (lyap + lyap.transpose()));
    st.min_eig_P = std::min(st.min_eig_P, ep.eigenvalues().minCoeff());
    st.max_eig_lyap = std::max(st.max_eig_lyap, el.eigenvalues().maxCoeff());
  }
  st.passed = st.min_eig_P > 0.0 && st.max_eig_lyap < 0.0;
  return st;
}

ValidationStats validate_hypercube_certificate(const MatrixPolynomial& A,
                                               const std::vector<double>& radii,
                                               const MatrixPolynomial& P_pairs,
                                               int samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ValidationStats st;
  st.samples = samples;
  st.min_eig_P = std::numeric_limits<double>::infinity();
  st.max_eig_lyap = -std::numeric_limits<double>::infinity();
  const int n = int(radii.size());
  for (int s = 0; s < samples; ++s) {
    std::vector<double> x(static_cast<size_t>(n)), lifted(static_cast<size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
      x[size_t(i)] = radii[size_t(i)] * u(rng);
      double alpha = (x[size_t(i)] + radii[size_t(i)]) / (2.0 * radii[size_t(i)]);
      lifted[size_t(2 * i)] = alpha;
      lifted[size_t(2 * i + 1)] = 1.0 - alpha;
    }
    Eigen::MatrixXd Pa = P_pairs.eval(lifted);
    Eigen::MatrixXd Aa = A.eval(x);
    Eigen::MatrixXd lyap = Aa.transpose() * Pa + Pa * Aa;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(Pa);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> el(
        0.5 * (lyap + lyap.transpose()));
    st.min_eig_P = std::min(st.min_eig_P, ep.eigenvalues().minCoeff());
    st.max_eig_lyap = std::max(st.max_eig_lyap, el.eigenvalues().maxCoeff());
  }
  st.passed = st.min_eig_P > 0.0 && st.max_eig_lyap < 0.0;
  return st;
}

StabilityReport robust_stability_simplex(const MatrixPolynomial& A, int dp,
                                         int d1, int d2,
                                         const PipelineOptions& opts) {
  StabilityReport rep;
  rep.dp = dp;
  rep.d1 = d1;
  rep.d2 = d2;
  rep.delta = opts.delta;
  MatrixPolynomial Ah = A.is_homogeneous() ? A : homogenize_simplex(A);
  SdpProblem prob = assemble_sdp(dp, Ah, d1, d2, opts.delta, opts.pool);
  SdpSolver solver(prob, solver_options(opts));
  SolveResult r = solver.solve();
  rep.solver_status = r.status;
  rep.iterations = r.iterations;
  if (r.status == SolveStatus::Optimal) {
    rep.P = recover_P(prob, r.state.y);
    rep.validation = validate_simplex_certificate(
        Ah, rep.P, opts.validation_samples, opts.seed);
    if (!rep.validation.passed)
      throw Error("certificate failed independent grid validation");
    rep.verdict = Verdict::Stable;
    return rep;
  }
  const int l = Ah.num_vars();
  bool unstable = sweep_detects_instability(
      Ah, [l](std::mt19937_64& rng) { return dirichlet(l, rng); },
      opts.validation_samples, opts.seed);
  rep.verdict = unstable ? Verdict::Unstable : Verdict::Infeasible;
  return rep;
}

StabilityReport robust_stability_hypercube(const MatrixPolynomial& A,
                                           const std::vector<double>& radii,
                                           const DegreeVector& Dp, int d1,
                                           int d2,
                                           const PipelineOptions& opts) {
  StabilityReport rep;
  rep.Dp = Dp;
  rep.d1 = d1;
  rep.d2 = d2;
  rep.delta = opts.delta;
  auto lifted = hypercube_to_multisimplex(A, radii);
  SdpProblem prob =
      assemble_sdp_multi(Dp, lifted.poly, d1, d2, opts.delta, opts.pool);
  SdpSolver solver(prob, solver_options(opts));
  SolveResult r = solver.solve();
  rep.solver_status = r.status;
  rep.iterations = r.iterations;
  if (r.status == SolveStatus::Optimal) {
    rep.P = recover_P(prob, r.state.y);
    rep.validation = validate_hypercube_certificate(
        A, radii, rep.P, opts.validation_samples, opts.seed);
    if (!rep.validation.passed)
      throw Error("certificate failed independent grid validation");
    rep.verdict = Verdict::Stable;
    return rep;
  }
  const int n = int(radii.size());
  bool unstable = sweep_detects_instability(
      A,
      [n, &radii](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> x(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) x[size_t(i)] = radii[size_t(i)] * u(rng);
        return x;
      },
      opts.validation_samples, opts.seed);
  rep.verdict = unstable ? Verdict::Unstable : Verdict::Infeasible;
  return rep;
}

BisectionResult bisect_scalar(const BisectionConfig& cfg,
                              const std::function<bool(double)>& feasible) {
  BisectionResult res;
  double lo = cfg.lo, hi = cfg.hi;
  if (cfg.verify_ends) {
    res.lo_feasible = feasible(lo);
    res.history.emplace_back(lo, res.lo_feasible);
    res.hi_feasible = feasible(hi);
    res.history.emplace_back(hi, res.hi_feasible);
    res.trials += 2;
    if (!res.lo_feasible)
      throw Error("bisection: certified end of the bracket is infeasible");
    if (res.hi_feasible) {
      // whole bracket feasible: report the far end
      res.bound = hi;
      return res;
    }
  } else {
    res.lo_feasible = true;
  }
  for (int k = 0; k < cfg.iterations; ++k) {
    double mid = 0.5 * (lo + hi);
    bool ok = feasible(mid);
    res.history.emplace_back(mid, ok);
    ++res.trials;
    (ok ? lo : hi) = mid;
  }
  res.bound = lo;
  return res;
}

UncertaintyBound max_uncertainty_simplex(const MatrixPolynomial& A, int dp,
                                         int d1, int d2,
                                         const BisectionConfig& cfg,
                                         const PipelineOptions& opts) {
  UncertaintyBound out;
  const int l = A.num_vars();
  auto feasible = [&](double L) {
    std::vector<double> scale(static_cast<size_t>(l), 1.0 - L);
    std::vector<double> offset(static_cast<size_t>(l), L);
    MatrixPolynomial AL = A.compose_affine(scale, offset);
    StabilityReport rep = robust_stability_simplex(AL, dp, d1, d2, opts);
    if (rep.verdict == Verdict::Stable) out.last_feasible = rep;
    return rep.verdict == Verdict::Stable;
  };
  out.bisection = bisect_scalar(cfg, feasible);
  out.bound = out.bisection.bound;
  return out;
}

UncertaintyBound max_hypercube_radius(const MatrixPolynomial& A,
                                      const std::vector<double>& radii_at_1,
                                      const DegreeVector& Dp, int d1, int d2,
                                      const BisectionConfig& cfg,
                                      const PipelineOptions& opts) {
  UncertaintyBound out;
  auto feasible = [&](double r) {
    if (r <= 0.0) {
      // degenerate box: nominal eigenvalue check at the center
      Eigen::MatrixXd A0 =
          A.eval(std::vector<double>(static_cast<size_t>(A.num_vars()), 0.0));
      Eigen::EigenSolver<Eigen::MatrixXd> eig(A0);
      return eig.eigenvalues().real().maxCoeff() < 0.0;
    }
    std::vector<double> radii = radii_at_1;
    for (double& v : radii) v *= r;
    StabilityReport rep =
        robust_stability_hypercube(A, radii, Dp, d1, d2, opts);
    if (rep.verdict == Verdict::Stable) out.last_feasible = rep;
    return rep.verdict == Verdict::Stable;
  };
  out.bisection = bisect_scalar(cfg, feasible);
  out.bound = out.bisection.bound;
  return out;
}

namespace {

DDecomposition build_shape_decomposition(const RoaShape& shape, double s) {
  std::vector<Eigen::Vector2d> verts;
  for (const auto& v : shape.vertices) verts.push_back(s * v);
  if (shape.decomposition == "quadrant") {
    double rx = 0.0, ry = 0.0;
    for (const auto& v : verts) {
      rx = std::max(rx, std::abs(v.x()));
      ry = std::max(ry, std::abs(v.y()));
    }
    return d_decompose_box_quadrants({rx, ry});
  }
  return d_decompose(Polytope::from_vertices_2d(verts));
}

}  // namespace

RoaResult nonlinear_roa(const std::vector<MatrixPolynomial>& field,
                        const RoaShape& shape, int degree,
                        const BisectionConfig& cfg,
                        const PipelineOptions& opts, double gamma_tol) {
  RoaResult out;
  SolverOptions so = solver_options(opts);
  // the trials only need the sign of gamma
  so.eps = std::max(so.eps, 1e-6);
  HandelmanCertificate best;
  auto feasible = [&](double s) {
    DDecomposition dec = build_shape_decomposition(shape, s);
    HandelmanLp lp = assemble_lp(dec, field, degree);
    LpResult lr = solve_lp(lp.lp, so);
    double gamma = lr.objective - lp.gamma_shift;
    if (lr.status != SolveStatus::Optimal || gamma <= gamma_tol) return false;
    best.d = degree;
    best.gamma = gamma;
    best.b.clear();
    best.c.clear();
    for (int i = 0; i < lp.regions; ++i) {
      best.b.push_back(lp.expand_b(i, lr.x));
      best.c.push_back(
          -lr.x.segment(lp.c_offset[size_t(i)], lp.c_size[size_t(i)]));
    }
    return true;
  };
  out.bisection = bisect_scalar(cfg, feasible);
  out.s_star = out.bisection.bound;
  out.capped = out.bisection.hi_feasible;
  out.certificate = best;
  out.decomposition = build_shape_decomposition(shape, out.s_star);
  std::vector<Eigen::Vector2d> verts;
  for (const auto& v : shape.vertices) verts.push_back(out.s_star * v);
  out.level = largest_inscribed_sublevel(
      out.certificate, out.decomposition,
      Polytope::from_vertices_2d(verts), 2000);
  return out;
}

TokamakResult tokamak_case_study(int dp, int d1, int d2,
                                 const BisectionConfig& cfg,
                                 const PipelineOptions& opts) {
  json data = json::parse(read_verified("tokamak.json"));
  const int n = data.at("n").get<int>();
  const int l = data.at("l").get<int>();
  auto mat = [&](const json& rows) {
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = rows.at(size_t(r)).at(size_t(c)).get<double>();
    return m;
  };
  Eigen::MatrixXd A0 = mat(data.at("A0"));
  std::vector<Eigen::MatrixXd> Ai;
  for (const auto& rows : data.at("A")) Ai.push_back(mat(rows));
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (const auto& m : Ai) S += m;

  TokamakResult out;
  Eigen::EigenSolver<Eigen::MatrixXd> nominal(A0);
  out.nominal_stable = nominal.eigenvalues().real().maxCoeff() < 0.0;

  auto feasible = [&](double rho) {
    if (rho <= 0.0) return out.nominal_stable;
    // vertex form of A0 + sum_j A_j * 2 rho (alpha_j - 1/2) on the simplex
    MatrixPolynomial A({{"a", l}}, n);
    for (int i = 0; i < l; ++i) {
      Exponent e(static_cast<size_t>(l), 0);
      e[size_t(i)] = 1;
      A.add_term(e, A0 - rho * S + 2.0 * rho * Ai[size_t(i)]);
    }
    StabilityReport rep = robust_stability_simplex(A, dp, d1, d2, opts);
    return rep.verdict == Verdict::Stable;
  };
  out.bisection = bisect_scalar(cfg, feasible);
  out.rho_normalized = out.bisection.bound;
  double ref = data.at("reference_normalized_rho").get<double>();
  out.within_reference_band = std::abs(out.rho_normalized - ref) <= 0.1 * ref;
  if (!out.within_reference_band)
    out.note =
        "normalized rho outside the reference band: data-transcription "
        "suspect (the nominal matrix is reconstructed, not printed)";
  return out;
}

std::string csv_bound_sweep(const std::vector<std::array<double, 3>>& rows) {
  std::ostringstream out;
  out << "d1,d2,bound\n";
  for (const auto& r : rows) out << r[0] << "," << r[1] << "," << r[2] << "\n";
  return out.str();
}

std::string csv_polyline(const std::vector<Eigen::Vector2d>& pts) {
  std::ostringstream out;
  out << "x,y\n";
  for (const auto& p : pts) out << p.x() << "," << p.y() << "\n";
  return out.str();
}

MatrixPolynomial load_ch4_example2() {
  json data = json::parse(read_verified("ch4_example2.json"));
  const int n = data.at("n").get<int>();
  const int l = data.at("l").get<int>();
  MatrixPolynomial A({{"a", l}}, n);
  for (const auto& t : data.at("monomials")) {
    Exponent e = t.at("exp").get<Exponent>();
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        m(r, c) = t.at("coef").at(size_t(r)).at(size_t(c)).get<double>();
    A.add_term(e, m);
  }
  return A;
}

void load_ch5_example2(MatrixPolynomial* A, std::vector<double>* radii) {
  json data = json::parse(read_verified("ch5_example2.json"));
  const int n = data.at("n").get<int>();
  *radii = data.at("radii").get<std::vector<double>>();
  MatrixPolynomial out({{"x", int(radii->size())}}, n);
  for (const auto& t : data.at("monomials")) {
    Exponent e = t.at("exp").get<Exponent>();
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        m(r, c) = t.at("coef").at(size_t(r)).at(size_t(c)).get<double>();
    out.add_term(e, m);
  }
  *A = out;
}

void load_ch5_example3(MatrixPolynomial* A) {
  json data = json::parse(read_verified("ch5_example3.json"));
  const int n = data.at("n").get<int>();
  auto mat = [&](const json& rows) {
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = rows.at(size_t(r)).at(size_t(c)).get<double>();
    return m;
  };
  const auto& terms = data.at("A");
  const int l = int(terms.size());
  MatrixPolynomial out({{"x", l}}, n);
  out.add_term(Exponent(static_cast<size_t>(l), 0), mat(data.at("A0")));
  for (int i = 0; i < l; ++i) {
    Exponent e(static_cast<size_t>(l), 0);
    e[size_t(i)] = 1;
    out.add_term(e, mat(terms.at(size_t(i))));
  }
  *A = out;
}

namespace {

std::vector<MatrixPolynomial> parse_field(const json& field, int nv) {
  std::vector<MatrixPolynomial> out;
  for (const auto& comp : field) {
    MatrixPolynomial f = MatrixPolynomial::scalar(nv);
    const auto& exps = comp.at("exp");
    const auto& coefs = comp.at("coef");
    for (size_t i = 0; i < exps.size(); ++i) {
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = coefs.at(i).get<double>();
      f.add_term(exps.at(i).get<Exponent>(), m);
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace

void load_ch6_example1(std::vector<MatrixPolynomial>* field, Polytope* gamma,
                       std::vector<SubPolytope>* regions) {
  json data = json::parse(read_verified("ch6_example1.json"));
  *field = parse_field(data.at("field"), 2);
  const auto& poly = data.at("polytope");
  const auto& W = poly.at("W");
  gamma->W.resize(int(W.size()), 2);
  gamma->u.resize(int(W.size()));
  for (int r = 0; r < int(W.size()); ++r) {
    gamma->W(r, 0) = W.at(size_t(r)).at(0).get<double>();
    gamma->W(r, 1) = W.at(size_t(r)).at(1).get<double>();
    gamma->u[r] = poly.at("u").at(size_t(r)).get<double>();
  }
  regions->clear();
  for (const auto& reg : data.at("regions")) {
    SubPolytope s;
    const auto& H = reg.at("H");
    s.H.resize(int(H.size()), 2);
    s.g.resize(int(H.size()));
    for (int r = 0; r < int(H.size()); ++r) {
      s.H(r, 0) = H.at(size_t(r)).at(0).get<double>();
      s.H(r, 1) = H.at(size_t(r)).at(1).get<double>();
      s.g[r] = reg.at("g").at(size_t(r)).get<double>();
    }
    regions->push_back(std::move(s));
  }
}

void load_vanderpol(std::vector<MatrixPolynomial>* field,
                    std::vector<RoaShape>* shapes,
                    std::vector<double>* s_targets) {
  json data = json::parse(read_verified("vanderpol.json"));
  *field = parse_field(data.at("field"), 2);
  shapes->clear();
  s_targets->clear();
  for (const auto& sh : data.at("shapes")) {
    RoaShape shape;
    shape.name = sh.at("name").get<std::string>();
    for (const auto& v : sh.at("vertices"))
      shape.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    shape.decomposition = sh.at("decomposition").get<std::string>();
    shapes->push_back(shape);
    s_targets->push_back(sh.at("s_star").get<double>());
  }
}

}  // namespace polycert
