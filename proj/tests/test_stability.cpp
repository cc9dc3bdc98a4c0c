#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "polycert/stability.hpp"
#include "polycert/util.hpp"

using namespace polycert;

namespace {

MatrixPolynomial constant_system(const Eigen::MatrixXd& A0, int l) {
  MatrixPolynomial A({{"a", l}}, int(A0.rows()));
  A.add_term(Exponent(static_cast<size_t>(l), 0), A0);
  return A;
}

}  // namespace

TEST_CASE("A = -I is certified at d1 = d2 = 0") {
  MatrixPolynomial A = constant_system(-Eigen::MatrixXd::Identity(2, 2), 2);
  StabilityReport rep = robust_stability_simplex(A, 0, 0, 0);
  CHECK(rep.verdict == Verdict::Stable);
  CHECK(rep.validation.passed);
  CHECK(rep.validation.min_eig_P > 0.0);
  CHECK(rep.validation.max_eig_lyap < 0.0);
}

TEST_CASE("affine stable family certified with a constant-capable P") {
  // A(a) = -a1 I - 2 a2 I
  MatrixPolynomial A({{"a", 2}}, 2);
  A.add_term({1, 0}, -Eigen::MatrixXd::Identity(2, 2));
  A.add_term({0, 1}, -2.0 * Eigen::MatrixXd::Identity(2, 2));
  StabilityReport rep = robust_stability_simplex(A, 1, 0, 0);
  CHECK(rep.verdict == Verdict::Stable);
}

TEST_CASE("vertex-stable but edge-unstable family is caught by the sweep") {
  MatrixPolynomial A({{"a", 2}}, 2);
  Eigen::MatrixXd A1(2, 2), A2(2, 2);
  A1 << -1.0, 10.0, 0.0, -1.0;
  A2 << -1.0, 0.0, 10.0, -1.0;
  A.add_term({1, 0}, A1);
  A.add_term({0, 1}, A2);
  // both vertices Hurwitz
  CHECK(Eigen::EigenSolver<Eigen::MatrixXd>(A1).eigenvalues().real().maxCoeff() <
        0.0);
  PipelineOptions opts;
  opts.max_iter = 80;
  StabilityReport rep = robust_stability_simplex(A, 0, 0, 0, opts);
  CHECK(rep.verdict == Verdict::Unstable);
}

TEST_CASE("scale zero reduces to the nominal vertex check") {
  MatrixPolynomial A = load_ch4_example2();
  // L = 1 collapses S_L to the point (1,1,1)
  std::vector<double> scale(3, 0.0), offset(3, 1.0);
  MatrixPolynomial A1 = A.compose_affine(scale, offset);
  CHECK(A1.terms().size() == 1);
  Eigen::MatrixXd sum = A1.coeff(Exponent(3, 0));
  Eigen::MatrixXd direct = A.eval({1.0, 1.0, 1.0});
  CHECK((sum - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("hypercube pipeline with one parameter reduces to a simplex pair") {
  // dx/dt = (-1 + 0.4 x1) y over |x1| <= 1: stable family
  MatrixPolynomial A = MatrixPolynomial::scalar(1);
  Eigen::MatrixXd m(1, 1);
  m << -1.0;
  A = MatrixPolynomial({{"x", 1}}, 2);
  A.add_term({0}, -Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd N(2, 2);
  N << 0.0, 0.4, 0.0, 0.0;
  A.add_term({1}, N);
  StabilityReport rep = robust_stability_hypercube(A, {1.0}, {1}, 1, 1);
  CHECK(rep.verdict == Verdict::Stable);
}

TEST_CASE("nilpotent perturbation of -I stays stable over the box") {
  MatrixPolynomial A({{"x", 1}}, 3);
  A.add_term({0}, -Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(3, 3);
  N(0, 1) = 0.1;
  N(1, 2) = 0.1;
  A.add_term({1}, N);
  StabilityReport rep = robust_stability_hypercube(A, {1.0}, {1}, 0, 0);
  CHECK(rep.verdict == Verdict::Stable);
}

TEST_CASE("bisection requires a certified low end and monotone history") {
  auto feasible = [](double t) { return t <= 0.6; };
  BisectionConfig cfg;
  cfg.lo = 0.0;
  cfg.hi = 1.0;
  cfg.iterations = 16;
  BisectionResult r = bisect_scalar(cfg, feasible);
  CHECK(r.bound == doctest::Approx(0.6).epsilon(1e-3));
  for (const auto& [value, ok] : r.history)
    CHECK(ok == (value <= 0.6));

  BisectionConfig bad = cfg;
  bad.lo = 0.9;  // infeasible start
  CHECK_THROWS_AS(bisect_scalar(bad, feasible), Error);
}

TEST_CASE("tokamak map g sends simplex corners to S_rho extreme points") {
  const double rho = 0.25;
  const int l = 8;
  for (int corner = 0; corner < l; ++corner) {
    std::vector<double> alpha(static_cast<size_t>(l), 0.0);
    alpha[size_t(corner)] = 1.0;
    double sum = 0.0;
    for (int i = 0; i < l; ++i) {
      double gi = 2.0 * rho * (alpha[size_t(i)] - 0.5);
      CHECK(std::abs(gi) == doctest::Approx(rho));
      sum += gi;
    }
    CHECK(sum == doctest::Approx(-6.0 * rho));
  }
}

TEST_CASE("data files verify against the manifest") {
  CHECK_NOTHROW(load_ch4_example2());
  MatrixPolynomial A;
  std::vector<double> radii;
  CHECK_NOTHROW(load_ch5_example2(&A, &radii));
  CHECK(radii == std::vector<double>{1.0, 0.5, 0.1});
  DegreeVector dv = A.group_degrees();
  CHECK(A.n() == 4);
  CHECK_NOTHROW(load_ch5_example3(&A));
  std::vector<MatrixPolynomial> field;
  Polytope gamma;
  std::vector<SubPolytope> regions;
  CHECK_NOTHROW(load_ch6_example1(&field, &gamma, &regions));
  CHECK(field.size() == 2);
  CHECK(regions.size() == 4);
  std::vector<RoaShape> shapes;
  std::vector<double> targets;
  CHECK_NOTHROW(load_vanderpol(&field, &shapes, &targets));
  CHECK(shapes.size() == 3);
  CHECK(targets[0] == doctest::Approx(1.639));
  CHECK_THROWS_AS(read_verified("missing_file.json"), DataError);
}

TEST_CASE("ch5 example2 lift has the printed degree vector") {
  MatrixPolynomial A;
  std::vector<double> radii;
  load_ch5_example2(&A, &radii);
  auto lift = hypercube_to_multisimplex(A, radii);
  CHECK(lift.degree_vector == DegreeVector{2, 1, 2});
}

TEST_CASE("plot emission formats") {
  CHECK(csv_bound_sweep({}).rfind("d1,d2,bound\n", 0) == 0);
  std::vector<std::array<double, 3>> rows = {{0, 0, -0.05}, {1, 1, -0.08}};
  std::string sweep = csv_bound_sweep(rows);
  CHECK(sweep.find("1,1,-0.08") != std::string::npos);
  std::vector<Eigen::Vector2d> poly = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}};
  std::string pl = csv_polyline(poly);
  CHECK(pl.rfind("x,y\n", 0) == 0);
  // closed polyline: first and last rows coincide
  auto first_nl = pl.find('\n', 4);
  std::string first_row = pl.substr(4, first_nl - 4);
  auto last_nl = pl.rfind('\n', pl.size() - 2);
  std::string last_row = pl.substr(last_nl + 1, pl.size() - last_nl - 2);
  CHECK(first_row == last_row);
}

TEST_CASE("validation failure aborts the driver") {
  // corrupt certificate: P = -I cannot validate; use the internal helper
  MatrixPolynomial A = constant_system(-Eigen::MatrixXd::Identity(2, 2), 2);
  MatrixPolynomial P({{"a", 2}}, 2);
  P.add_term({0, 0}, -Eigen::MatrixXd::Identity(2, 2));
  ValidationStats st = validate_simplex_certificate(A, P, 100, 1);
  CHECK(!st.passed);
}
