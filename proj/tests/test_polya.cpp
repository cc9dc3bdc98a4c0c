#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "polycert/polya.hpp"
#include "polycert/util.hpp"

using namespace polycert;

namespace {

Eigen::MatrixXd s1(double v) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return m;
}

Eigen::MatrixXd random_mat(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = dist(rng);
  return m;
}

Eigen::MatrixXd random_sym(int n, std::mt19937_64& rng) {
  Eigen::MatrixXd m = random_mat(n, rng);
  return 0.5 * (m + m.transpose());
}

MatrixPolynomial random_homog(int l, int d, int n, std::mt19937_64& rng,
                              bool sym) {
  MatrixPolynomial p({{"a", l}}, n);
  for (const auto& e : exponent_set(l, d))
    p.add_term(e, sym ? random_sym(n, rng) : random_mat(n, rng));
  return p;
}

// independent oracle: beta_{h,gamma} = multinomial(d1; gamma - h)
double beta_oracle(const Exponent& h, const Exponent& g, int d1) {
  std::vector<int> diff(h.size());
  for (size_t i = 0; i < h.size(); ++i) diff[i] = g[i] - h[i];
  return multinomial(d1, diff);
}

}  // namespace

TEST_CASE("beta worked example (l=2, dp=1, d1=1)") {
  BetaTable t = compute_beta(2, 1, 1);
  REQUIRE(t.h_set.size() == 2);
  REQUIRE(t.gamma_set.size() == 3);
  CHECK(t.at(0, 0) == 1.0);
  CHECK(t.at(1, 0) == 0.0);
  CHECK(t.at(0, 1) == 1.0);
  CHECK(t.at(1, 1) == 1.0);
  CHECK(t.at(0, 2) == 0.0);
  CHECK(t.at(1, 2) == 1.0);
}

TEST_CASE("beta with d1=0 is the identity pattern") {
  BetaTable t = compute_beta(3, 2, 0);
  for (long long g = 0; g < t.gamma_set.size(); ++g)
    for (long long h = 0; h < t.h_set.size(); ++h)
      CHECK(t.at(h, g) == (h == g ? 1.0 : 0.0));
}

TEST_CASE("beta equals the multinomial oracle") {
  for (int l = 2; l <= 3; ++l)
    for (int dp = 1; dp <= 2; ++dp)
      for (int d1 = 0; d1 <= 3; ++d1) {
        BetaTable t = compute_beta(l, dp, d1);
        for (long long g = 0; g < t.gamma_set.size(); ++g)
          for (long long h = 0; h < t.h_set.size(); ++h)
            CHECK(t.at(h, g) ==
                  beta_oracle(t.h_set.concatenated(h),
                              t.gamma_set.concatenated(g), d1));
      }
}

TEST_CASE("beta column sums match the (sum alpha)^(dp+d1) expansion") {
  // spec: sum_h beta_{h,gamma} * multinomial(dp; h) = multinomial(dp+d1; g)
  BetaTable t = compute_beta(3, 1, 2);
  for (long long g = 0; g < t.gamma_set.size(); ++g) {
    double acc = 0.0;
    for (long long h = 0; h < t.h_set.size(); ++h) {
      Exponent he = t.h_set.concatenated(h);
      acc += t.at(h, g) * multinomial(1, std::vector<int>(he.begin(), he.end()));
    }
    Exponent ge = t.gamma_set.concatenated(g);
    CHECK(acc ==
          doctest::Approx(multinomial(3, std::vector<int>(ge.begin(), ge.end()))));
  }
}

TEST_CASE("H worked example (A = A1 a1 + A2 a2, dp = 1, d2 = 1)") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd A1 = random_mat(2, rng), A2 = random_mat(2, rng);
  MatrixPolynomial A({{"a", 2}}, 2);
  A.add_term({1, 0}, A1);
  A.add_term({0, 1}, A2);
  HTable t = compute_H(A, 2, 1, 1, 1);
  REQUIRE(t.h_set.size() == 2);
  REQUIRE(t.gamma_set.size() == 4);
  auto near = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() < 1e-14;
  };
  CHECK(near(t.at(0, 0), A1));
  CHECK(near(t.at(1, 0), Eigen::MatrixXd::Zero(2, 2)));
  CHECK(near(t.at(0, 1), A1 + A2));
  CHECK(near(t.at(1, 1), A1));
  CHECK(near(t.at(0, 2), A2));
  CHECK(near(t.at(1, 2), A1 + A2));
  CHECK(near(t.at(0, 3), Eigen::MatrixXd::Zero(2, 2)));
  CHECK(near(t.at(1, 3), A2));
}

TEST_CASE("H of the zero polynomial is zero") {
  MatrixPolynomial A({{"a", 2}}, 2);
  HTable t = compute_H(A, 2, 1, 1, 1);
  for (auto& col : t.cols)
    for (auto& m : col) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("H reconstruction against direct polynomial multiplication") {
  // sum_h (H^T_{h,g} P_h + P_h H_{h,g}) over g reproduces the coefficient
  // list of (sum alpha)^{d2} (A'P + PA)
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    int l = 1 + int(rng() % 3);
    int dp = 1 + int(rng() % 2);
    int d1 = int(rng() % 4);
    int d2 = int(rng() % 4);
    int n = 1 + int(rng() % 3);
    int da = 1 + int(rng() % 2);

    MatrixPolynomial A = random_homog(l, da, n, rng, false);
    MatrixPolynomial P = random_homog(l, dp, n, rng, true);

    // beta route
    BetaTable bt = compute_beta(l, dp, d1);
    MatrixPolynomial lhs_beta({{"a", l}}, n);
    for (long long g = 0; g < bt.gamma_set.size(); ++g) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
      for (long long h = 0; h < bt.h_set.size(); ++h)
        acc += bt.at(h, g) * P.coeff(bt.h_set.concatenated(h));
      lhs_beta.add_term(bt.gamma_set.concatenated(g), acc);
    }
    MatrixPolynomial rhs_beta = simplex_form_power(P.groups(), 0, d1, n) * P;
    MatrixPolynomial beta_diff = lhs_beta - rhs_beta;
    double beta_err = 0.0;
    for (const auto& [e, c] : beta_diff.terms())
      beta_err = std::max(beta_err, c.cwiseAbs().maxCoeff());
    CHECK(beta_err <= 1e-9);

    // H route
    HTable ht = compute_H(A, l, dp, da, d2);
    MatrixPolynomial lhs_h({{"a", l}}, n);
    for (long long g = 0; g < ht.gamma_set.size(); ++g) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
      for (long long h = 0; h < ht.h_set.size(); ++h) {
        const Eigen::MatrixXd& H = ht.at(h, g);
        const Eigen::MatrixXd Ph = P.coeff(ht.h_set.concatenated(h));
        acc += H.transpose() * Ph + Ph * H;
      }
      lhs_h.add_term(ht.gamma_set.concatenated(g), acc);
    }
    MatrixPolynomial lyap = A.transpose() * P + P * A;
    MatrixPolynomial rhs_h = simplex_form_power(P.groups(), 0, d2, n) * lyap;
    MatrixPolynomial h_diff = lhs_h - rhs_h;
    double m = 0;
    for (const auto& [e, c] : h_diff.terms())
      m = std::max(m, c.cwiseAbs().maxCoeff());
    CHECK(m <= 1e-9);
  }
}

TEST_CASE("multi-group tables reduce to the single-simplex tables") {
  std::mt19937_64 rng(29);
  BetaTable single = compute_beta(3, 2, 2);
  BetaTable multi = compute_beta_multi({3}, {2}, 2);
  REQUIRE(single.gamma_set.size() == multi.gamma_set.size());
  for (long long g = 0; g < single.gamma_set.size(); ++g)
    CHECK((single.cols[size_t(g)] - multi.cols[size_t(g)]).cwiseAbs().maxCoeff() ==
          0.0);

  MatrixPolynomial A = random_homog(3, 1, 2, rng, false);
  HTable hs = compute_H(A, 3, 2, 1, 2);
  HTable hm = compute_H_multi(A, {2}, 2);
  REQUIRE(hs.gamma_set.size() == hm.gamma_set.size());
  for (long long g = 0; g < hs.gamma_set.size(); ++g)
    for (long long h = 0; h < hs.h_set.size(); ++h)
      CHECK((hs.at(h, g) - hm.at(h, g)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multi-group beta matches the product expansion oracle") {
  // two 2-groups, Dp = [1,1], d1 = 1: sum_H beta * P_H over Gamma equals
  // the coefficients of prod_i (sum alpha_i.) * P
  std::mt19937_64 rng(31);
  int n = 2;
  std::vector<VarGroup> groups = {{"a1", 2}, {"a2", 2}};
  MatrixPolynomial P(groups, n);
  MultiExponentSet hset({2, 2}, {1, 1});
  for (long long h = 0; h < hset.size(); ++h)
    P.add_term(hset.concatenated(h), random_sym(n, rng));

  BetaTable t = compute_beta_multi({2, 2}, {1, 1}, 1);
  MatrixPolynomial lhs(groups, n);
  for (long long g = 0; g < t.gamma_set.size(); ++g) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (long long h = 0; h < t.h_set.size(); ++h)
      acc += t.at(h, g) * P.coeff(t.h_set.concatenated(h));
    lhs.add_term(t.gamma_set.concatenated(g), acc);
  }
  MatrixPolynomial rhs = simplex_form_power(groups, 0, 1, n) *
                         simplex_form_power(groups, 1, 1, n) * P;
  MatrixPolynomial diff = lhs - rhs;
  double m = 0;
  for (const auto& [e, c] : diff.terms())
    m = std::max(m, c.cwiseAbs().maxCoeff());
  CHECK(m <= 1e-12);
}

TEST_CASE("multi H with Da = 0 and d2 = 0 is the constant pattern") {
  std::mt19937_64 rng(37);
  Eigen::MatrixXd A0 = random_mat(2, rng);
  MatrixPolynomial A({{"a1", 2}, {"a2", 2}}, 2);
  A.add_term({0, 0, 0, 0}, A0);
  HTable t = compute_H_multi(A, {1, 1}, 0);
  for (long long g = 0; g < t.gamma_set.size(); ++g)
    for (long long h = 0; h < t.h_set.size(); ++h) {
      if (h == g)
        CHECK((t.at(h, g) - A0).cwiseAbs().maxCoeff() == 0.0);
      else
        CHECK(t.at(h, g).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("assembled SDP dimensions follow the counting formulas") {
  std::mt19937_64 rng(41);
  MatrixPolynomial A = random_homog(2, 1, 2, rng, false);
  SdpProblem prob = assemble_sdp(1, A, 1, 1, 1e-2);
  CHECK(prob.K() == 6);  // Ntil = 3, f(2,1) = 2
  CHECK(prob.structure.L == 3);
  CHECK(prob.structure.M == 4);
  CHECK(prob.structure.blocks() == 7);
  for (int j = 0; j < prob.structure.blocks(); ++j) {
    CHECK(prob.C[size_t(j)].rows() == 2);
    CHECK(prob.C[size_t(j)].cols() == 2);
  }
  // B blocks symmetric
  for (const auto& dual : prob.B)
    for (const auto& [blk, m] : dual)
      CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(assemble_sdp(1, A, 1, 1, 0.0), Error);
}

TEST_CASE("multi assembly dimensions and reduction to single") {
  std::mt19937_64 rng(43);
  // N=2, l=(2,2), Dp=[1,1], d1=0 -> L = 4
  MatrixPolynomial A({{"a1", 2}, {"a2", 2}}, 2);
  MultiExponentSet da_set({2, 2}, {1, 1});
  for (long long i = 0; i < da_set.size(); ++i)
    A.add_term(da_set.concatenated(i), random_mat(2, rng));
  SdpProblem prob = assemble_sdp_multi({1, 1}, A, 0, 0, 1e-2);
  CHECK(prob.structure.L == 4);
  CHECK(prob.structure.M == 9);  // f(2,2)^2 with dpa_i = 2
  CHECK(prob.K() == 3 * 4);

  // one group: equals assemble_sdp exactly
  MatrixPolynomial As = random_homog(2, 1, 2, rng, false);
  SdpProblem p1 = assemble_sdp(1, As, 1, 1, 1e-2);
  SdpProblem p2 = assemble_sdp_multi({1}, As, 1, 1, 1e-2);
  CHECK(p1.equals(p2));

  // sizes used in Ch.5: N=4 groups of size 2, Dp=Da=[1..], d1=d2=1
  // L = prod f(2, 1+1) = 3^4, M = prod f(2, 1+1+1) = 4^4
  MatrixPolynomial A4({{"a1", 2}, {"a2", 2}, {"a3", 2}, {"a4", 2}}, 2);
  MultiExponentSet da4({2, 2, 2, 2}, {1, 1, 1, 1});
  for (long long i = 0; i < da4.size(); ++i)
    A4.add_term(da4.concatenated(i), random_mat(2, rng));
  SdpProblem p4 = assemble_sdp_multi({2, 2, 2, 2}, A4, 1, 1, 1e-2);
  CHECK(p4.structure.L == 256);  // f(2, 2+1)^4
  CHECK(p4.structure.M == 625);  // f(2, 2+1+1)^4
}

TEST_CASE("zeta weights equal products of multinomial coefficients") {
  std::mt19937_64 rng(47);
  MatrixPolynomial A({{"a1", 2}, {"a2", 2}}, 1);
  MultiExponentSet da_set({2, 2}, {1, 0});
  for (long long i = 0; i < da_set.size(); ++i)
    A.add_term(da_set.concatenated(i), s1(1.0));
  int d1 = 2;
  SdpProblem prob = assemble_sdp_multi({1, 1}, A, d1, 0, 1.0);
  // oracle: expansion coefficients of prod_i (sum alpha_i)^{dp_i + d1}
  MultiExponentSet gset({2, 2}, {1 + d1, 1 + d1});
  REQUIRE(prob.structure.L == gset.size());
  for (long long j = 0; j < gset.size(); ++j) {
    Exponent e = gset.concatenated(j);
    double want = multinomial(3, {e[0], e[1]}) * multinomial(3, {e[2], e[3]});
    CHECK(prob.C[size_t(j)](0, 0) == doctest::Approx(want));
  }
}

TEST_CASE("simplex minimization via Polya bisection") {
  // f = a1 + a2 is identically 1 on the simplex
  MatrixPolynomial f({{"a", 2}}, 1);
  f.add_term({1, 0}, s1(1.0));
  f.add_term({0, 1}, s1(1.0));
  auto r = min_poly_over_simplex(f, 6, -2.0, 2.0, 30);
  CHECK(r.bound == doctest::Approx(1.0).epsilon(1e-5));

  // f = a1^2 + a2^2 has minimum 1/2 at the center
  MatrixPolynomial g({{"a", 2}}, 1);
  g.add_term({2, 0}, s1(1.0));
  g.add_term({0, 2}, s1(1.0));
  auto r2 = min_poly_over_simplex(g, 60, -2.0, 2.0, 30);
  CHECK(r2.bound <= 0.5 + 1e-12);
  CHECK(r2.bound >= 0.48);  // bound approaches 0.5 as e grows

  // interior zero: bound stays below the true minimum (documented limit)
  // f = (a1 - a2)^2 has minimum 0 at the center
  MatrixPolynomial m({{"a", 2}}, 1);
  m.add_term({2, 0}, s1(1.0));
  m.add_term({1, 1}, s1(-2.0));
  m.add_term({0, 2}, s1(1.0));
  auto r3 = min_poly_over_simplex(m, 8, -2.0, 2.0, 30);
  CHECK(r3.bound <= 0.0 + 1e-9);
}

TEST_CASE("simplex minimization bound is non-decreasing in e_max") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> dist(0.05, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixPolynomial f({{"a", 2}}, 1);
    for (const auto& e : exponent_set(2, 3)) f.add_term(e, s1(dist(rng)));
    double prev = -std::numeric_limits<double>::infinity();
    for (int emax = 0; emax <= 4; ++emax) {
      auto r = min_poly_over_simplex(f, emax, -1.0, 2.0, 20);
      CHECK(r.bound >= prev - 1e-12);
      prev = r.bound;
    }
  }
}

TEST_CASE("global nonnegativity tests") {
  // f = x1^2 + x2^2 certified at e = 0 by the Habicht test
  MatrixPolynomial f = MatrixPolynomial::scalar(2);
  f.add_term({2, 0}, s1(1.0));
  f.add_term({0, 2}, s1(1.0));
  auto rep = global_nonnegativity_tests(f, 4);
  CHECK(rep.habicht_applicable);
  CHECK(rep.habicht_e == 0);
  CHECK(rep.nonnegative_on_Rn);

  // f = x1^2 - x1 x2 + x2^2: positive definite; orthant tests certify all
  // four cones even though sign-mixed terms block a direct reading
  MatrixPolynomial g = MatrixPolynomial::scalar(2);
  g.add_term({2, 0}, s1(1.0));
  g.add_term({1, 1}, s1(-1.0));
  g.add_term({0, 2}, s1(1.0));
  auto rep2 = global_nonnegativity_tests(g, 8);
  CHECK(rep2.nonnegative_on_Rn);
  bool some_positive_lambda = false;
  for (const auto& o : rep2.orthants)
    if (o.lambda >= 1) some_positive_lambda = true;
  CHECK(some_positive_lambda);

  // f = x1 x2: inconclusive globally, certified on the (+,+) orthant at 0
  MatrixPolynomial h = MatrixPolynomial::scalar(2);
  h.add_term({1, 1}, s1(1.0));
  auto rep3 = global_nonnegativity_tests(h, 6);
  CHECK(!rep3.nonnegative_on_Rn);
  CHECK(rep3.habicht_e == -1);
  for (const auto& o : rep3.orthants)
    if (o.signs == std::vector<int>{1, 1}) CHECK(o.lambda == 0);
}
