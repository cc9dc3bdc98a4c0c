#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "polycert/polya.hpp"
#include "polycert/sdp.hpp"
#include "polycert/util.hpp"

using namespace polycert;

namespace {

Eigen::MatrixXd random_sym(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = dist(rng);
  return 0.5 * (m + m.transpose()).eval();
}

// dual: min y s.t. y I2 - I2 = Z >= 0; optimum y* = 1
SdpProblem analytic_problem() {
  SdpProblem p;
  p.structure.L = 1;
  p.structure.M = 0;
  p.structure.n = 2;
  p.structure.sizes = {2};
  p.C = {Eigen::MatrixXd::Identity(2, 2)};
  p.B.resize(1);
  p.B[0].emplace_back(0, Eigen::MatrixXd::Identity(2, 2));
  p.a = Eigen::VectorXd::Ones(1);
  return p;
}

// Random strictly feasible primal-dual pair with block structure.
SdpProblem random_feasible(int blocks, int n, int K, std::mt19937_64& rng) {
  SdpProblem p;
  p.structure.L = blocks;
  p.structure.M = 0;
  p.structure.n = n;
  p.structure.sizes.assign(size_t(blocks), n);
  // strictly feasible X*: X = I + small sym
  BlockDiagMatrix Xstar = BlockDiagMatrix::identity(p.structure);
  for (int j = 0; j < blocks; ++j)
    Xstar.block(j) += 0.2 * random_sym(n, rng);
  p.B.resize(size_t(K));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < blocks; ++j)
      p.B[size_t(k)].emplace_back(j, random_sym(n, rng));
  p.a = Eigen::VectorXd(K);
  for (int k = 0; k < K; ++k) {
    double acc = 0.0;
    for (const auto& [j, m] : p.B[size_t(k)])
      acc += m.cwiseProduct(Xstar.block(j)).sum();
    p.a[k] = acc;
  }
  // strictly feasible dual: C = sum y* B - Z*, Z* > 0
  Eigen::VectorXd ystar(K);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int k = 0; k < K; ++k) ystar[k] = dist(rng);
  p.C.assign(size_t(blocks), Eigen::MatrixXd::Zero(n, n));
  for (int j = 0; j < blocks; ++j) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < K; ++k) acc += ystar[k] * p.B[size_t(k)][size_t(j)].second;
    Eigen::MatrixXd zs = 0.3 * random_sym(n, rng);
    zs = zs * zs.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    p.C[size_t(j)] = acc - zs;
  }
  return p;
}

// dense eigenvalue feasibility oracle for a solved instance
void check_with_dense_oracle(const SdpProblem& p, const SolveResult& r,
                             double tol) {
  // dual slack Z = sum B y - C must be PSD (dense eigensolver)
  for (int j = 0; j < p.structure.blocks(); ++j) {
    Eigen::MatrixXd Z = -p.C[size_t(j)];
    for (long long k = 0; k < p.K(); ++k)
      for (const auto& [blk, m] : p.B[size_t(k)])
        if (blk == j) Z += r.state.y[k] * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Z);
    CHECK(eig.eigenvalues().minCoeff() >= -tol);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigx(r.state.X.block(j));
    CHECK(eigx.eigenvalues().minCoeff() >= -tol);
  }
  // primal feasibility
  for (long long k = 0; k < p.K(); ++k) {
    double acc = 0.0;
    for (const auto& [blk, m] : p.B[size_t(k)])
      acc += m.cwiseProduct(r.state.X.block(blk)).sum();
    CHECK(acc == doctest::Approx(p.a[k]).epsilon(1e-6));
  }
}

}  // namespace

TEST_CASE("init_state builds identity blocks with the printed barrier") {
  std::mt19937_64 rng(1);
  SdpProblem p = random_feasible(4, 2, 3, rng);
  SdpState s = init_state(p);
  CHECK(s.X.blocks() == 4);
  for (int j = 0; j < 4; ++j)
    CHECK((s.X.block(j) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK(s.mu == doctest::Approx(4.0 * 2.0 / 3.0));
  CHECK(s.y.cwiseAbs().maxCoeff() == 0.0);

  SdpProblem zero_c = p;
  for (auto& c : zero_c.C) c.setZero();
  SdpState s2 = init_state(zero_c);
  CHECK(s2.gap == 0.0);
}

TEST_CASE("analytic one-block problem solves to high accuracy") {
  SdpProblem p = analytic_problem();
  SolverOptions opts;
  opts.eps = 1e-9;
  SdpSolver solver(p, opts);
  SolveResult r = solver.solve();
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(r.iterations <= 30);
  CHECK(std::abs(r.gap) <= 1e-8);
  CHECK(r.state.y[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("predictor vanishes on the central path at tiny mu") {
  SdpProblem p = analytic_problem();
  double mu = 1e-10;
  SdpState s;
  s.X = BlockDiagMatrix::identity(p.structure);
  s.X.block(0) *= 0.5;
  s.Z = BlockDiagMatrix::identity(p.structure);
  s.Z.block(0) *= 2.0 * mu;
  s.y = Eigen::VectorXd::Constant(1, 1.0 + 2.0 * mu);
  s.mu = mu;
  SdpSolver solver(p);
  Directions d = solver.predictor(s);
  CHECK(std::abs(d.dy[0]) <= 1e-8);
  CHECK(d.dX.block(0).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(d.dZ.block(0).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("corrector reuses the predictor factorization") {
  SdpProblem p = analytic_problem();
  SdpSolver solver(p);
  SdpState s = init_state(p);
  Directions pred = solver.predictor(s);
  int after_pred = solver.factorizations_last_iter();
  Directions corr = solver.corrector(s, pred);
  CHECK(solver.factorizations_last_iter() == after_pred);
  // corrector with mu = 0 from an exact predictor solution is ~0:
  // at the analytic optimum the second-order term is negligible
  (void)corr;
}

TEST_CASE("corrector is ~0 at mu=0 with exact predictor solution") {
  // From the central-path state, set mu = 0: the corrector direction
  // reduces to -Z^-1 dZhat dXhat terms, which vanish as mu -> 0.
  SdpProblem p = analytic_problem();
  double mu = 1e-10;
  SdpState s;
  s.X = BlockDiagMatrix::identity(p.structure);
  s.X.block(0) *= 0.5;
  s.Z = BlockDiagMatrix::identity(p.structure);
  s.Z.block(0) *= 2.0 * mu;
  s.y = Eigen::VectorXd::Constant(1, 1.0 + 2.0 * mu);
  s.mu = 0.0;
  SdpSolver solver(p);
  Directions pred = solver.predictor(s);
  Directions corr = solver.corrector(s, pred);
  CHECK(std::abs(corr.dy[0]) <= 1e-6);
  CHECK(corr.dX.block(0).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(corr.dZ.block(0).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("line search matches the boundary examples") {
  SdpProblem p = analytic_problem();
  SdpSolver solver(p);
  SdpState s = init_state(p);

  Directions zero;
  zero.dX = BlockDiagMatrix(p.structure);
  zero.dZ = BlockDiagMatrix(p.structure);
  zero.dy = Eigen::VectorXd::Zero(1);
  auto [tp0, td0] = solver.line_search(s, zero);
  CHECK(tp0 == doctest::Approx(1.0));
  CHECK(td0 == doctest::Approx(1.0));

  Directions shrink = zero;
  shrink.dX.block(0) = -2.0 * Eigen::MatrixXd::Identity(2, 2);
  auto [tp1, td1] = solver.line_search(s, shrink);
  CHECK(tp1 == doctest::Approx(0.98 * 0.5));
  CHECK(td1 == doctest::Approx(1.0));

  // a PSD-preserving random direction keeps the iterate factorizable
  std::mt19937_64 rng(5);
  Directions rnd = zero;
  rnd.dX.block(0) = 0.4 * random_sym(2, rng);
  rnd.dZ.block(0) = 0.4 * random_sym(2, rng);
  auto [tp2, td2] = solver.line_search(s, rnd);
  Eigen::LLT<Eigen::MatrixXd> lx(
      (s.X.block(0) + tp2 * rnd.dX.block(0)).eval());
  Eigen::LLT<Eigen::MatrixXd> lz(
      (s.Z.block(0) + td2 * rnd.dZ.block(0)).eval());
  CHECK(lx.info() == Eigen::Success);
  CHECK(lz.info() == Eigen::Success);
}

TEST_CASE("20 random feasible block SDPs agree with the dense oracle") {
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 20; ++trial) {
    int blocks = 2 + int(rng() % 3);
    int n = 2 + int(rng() % 2);
    int K = 2 + int(rng() % 3);
    SdpProblem p = random_feasible(blocks, n, K, rng);
    SolverOptions opts;
    opts.eps = 1e-8;
    SdpSolver solver(p, opts);
    SolveResult r = solver.solve();
    REQUIRE(r.status == SolveStatus::Optimal);
    check_with_dense_oracle(p, r, 1e-7);
    ++solved;
  }
  CHECK(solved == 20);
}

TEST_CASE("iterates stay block-diagonal, symmetric, with symmetric Schur") {
  std::mt19937_64 rng(99);
  SdpProblem p = random_feasible(3, 3, 4, rng);
  SolverOptions opts;
  int checked = 0;
  opts.observer = [&](const SdpState& s, int) {
    CHECK(s.X.blocks() == 3);
    CHECK(s.Z.blocks() == 3);
    CHECK(s.X.max_asymmetry() <= 1e-10);
    CHECK(s.Z.max_asymmetry() <= 1e-10);
    for (int j = 0; j < 3; ++j) {
      CHECK(s.X.block(j).rows() == 3);
      CHECK(s.X.block(j).cols() == 3);
    }
    ++checked;
  };
  SdpSolver solver(p, opts);
  SolveResult r = solver.solve();
  CHECK(r.status == SolveStatus::Optimal);
  CHECK(checked == r.iterations);
  const Eigen::MatrixXd& lam = solver.schur();
  double asym = (lam - lam.transpose()).cwiseAbs().maxCoeff();
  CHECK(asym <= 1e-9 * std::max(1.0, lam.cwiseAbs().maxCoeff()));
}

TEST_CASE("duality gap decreases at >= 90% of iterations") {
  std::mt19937_64 rng(123);
  int total = 0, decreased = 0;
  for (int trial = 0; trial < 8; ++trial) {
    SdpProblem p = random_feasible(3, 2, 3, rng);
    double prev = std::numeric_limits<double>::infinity();
    SolverOptions opts;
    opts.observer = [&](const SdpState& s, int) {
      if (std::isfinite(prev)) {
        ++total;
        if (std::abs(s.gap) < prev) ++decreased;
      }
      prev = std::abs(s.gap);
    };
    SdpSolver solver(p, opts);
    SolveResult r = solver.solve();
    REQUIRE(r.status == SolveStatus::Optimal);
  }
  CHECK(double(decreased) >= 0.9 * double(total));
}

TEST_CASE("Polya SDP certifies A = -I and rejects A = +I") {
  MatrixPolynomial A({{"a", 2}}, 2);
  A.add_term({1, 0}, -Eigen::MatrixXd::Identity(2, 2));
  A.add_term({0, 1}, -Eigen::MatrixXd::Identity(2, 2));
  SdpProblem prob = assemble_sdp(1, A, 1, 1, 1e-2);
  SolverOptions opts;
  opts.eps = 1e-7;
  SdpSolver solver(prob, opts);
  SolveResult r = solver.solve();
  REQUIRE(r.status == SolveStatus::Optimal);
  MatrixPolynomial P = recover_P(prob, r.state.y);
  // P(alpha) > 0 on sampled simplex points
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> ed(1.0);
  for (int s = 0; s < 200; ++s) {
    double u = ed(rng), v = ed(rng);
    double a1 = u / (u + v);
    Eigen::MatrixXd Pa = P.eval({a1, 1.0 - a1});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Pa);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }

  // unstable system: no Lyapunov function exists
  MatrixPolynomial Au({{"a", 2}}, 2);
  Au.add_term({1, 0}, Eigen::MatrixXd::Identity(2, 2));
  Au.add_term({0, 1}, Eigen::MatrixXd::Identity(2, 2));
  SdpProblem prob_u = assemble_sdp(1, Au, 1, 1, 1e-2);
  SolverOptions opts_u;
  opts_u.max_iter = 120;
  SdpSolver solver_u(prob_u, opts_u);
  SolveResult ru = solver_u.solve();
  CHECK(ru.status != SolveStatus::Optimal);
}

TEST_CASE("degenerate l=1 simplex still certifies A = -I") {
  MatrixPolynomial A({{"a", 1}}, 2);
  A.add_term({1}, -Eigen::MatrixXd::Identity(2, 2));
  SdpProblem prob = assemble_sdp(1, A, 1, 1, 1e-2);
  SdpSolver solver(prob);
  SolveResult r = solver.solve();
  REQUIRE(r.status == SolveStatus::Optimal);
  MatrixPolynomial P = recover_P(prob, r.state.y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P.eval({1.0}));
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("LP path: 1x1 blocks solve a small standard-form LP") {
  // max x1 + 2 x2 s.t. x1 + x2 + s = 4, x2 + t = 3, x >= 0
  LpStandardForm lp;
  lp.num_vars = 4;
  lp.c = Eigen::VectorXd::Zero(4);
  lp.c[0] = 1.0;
  lp.c[1] = 2.0;
  lp.b = Eigen::VectorXd(2);
  lp.b << 4.0, 3.0;
  lp.columns.resize(4);
  lp.columns[0] = {{0, 1.0}};
  lp.columns[1] = {{0, 1.0}, {1, 1.0}};
  lp.columns[2] = {{0, 1.0}};
  lp.columns[3] = {{1, 1.0}};
  LpResult r = solve_lp(lp);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(7.0).epsilon(1e-6));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("problem JSON round trip") {
  std::mt19937_64 rng(17);
  SdpProblem p = random_feasible(2, 2, 2, rng);
  std::string text = p.to_json();
  SdpProblem q = SdpProblem::from_json(text);
  CHECK(q.structure.L == p.structure.L);
  CHECK(q.K() == p.K());
  CHECK(q.a == p.a);
  for (size_t j = 0; j < p.C.size(); ++j)
    CHECK((q.C[j] - p.C[j]).cwiseAbs().maxCoeff() <= 1e-12);
}
