#include "polycert/sdp.hpp"

#include <atomic>
#include <cmath>

#include "json.hpp"
#include "polycert/util.hpp"

namespace polycert {

using nlohmann::json;

long long BlockStructure::total_dim() const {
  long long t = 0;
  for (int s : sizes) t += s;
  return t;
}

BlockDiagMatrix::BlockDiagMatrix(const BlockStructure& s) {
  blocks_.reserve(s.sizes.size());
  for (int n : s.sizes) blocks_.emplace_back(Eigen::MatrixXd::Zero(n, n));
}

BlockDiagMatrix BlockDiagMatrix::identity(const BlockStructure& s) {
  BlockDiagMatrix m;
  m.blocks_.reserve(s.sizes.size());
  for (int n : s.sizes) m.blocks_.emplace_back(Eigen::MatrixXd::Identity(n, n));
  return m;
}

BlockDiagMatrix BlockDiagMatrix::operator+(const BlockDiagMatrix& o) const {
  BlockDiagMatrix r = *this;
  for (int i = 0; i < blocks(); ++i) r.blocks_[i] += o.blocks_[i];
  return r;
}

BlockDiagMatrix BlockDiagMatrix::operator-(const BlockDiagMatrix& o) const {
  BlockDiagMatrix r = *this;
  for (int i = 0; i < blocks(); ++i) r.blocks_[i] -= o.blocks_[i];
  return r;
}

BlockDiagMatrix BlockDiagMatrix::operator*(const BlockDiagMatrix& o) const {
  BlockDiagMatrix r = *this;
  for (int i = 0; i < blocks(); ++i) r.blocks_[i] = blocks_[i] * o.blocks_[i];
  return r;
}

BlockDiagMatrix BlockDiagMatrix::scaled(double s) const {
  BlockDiagMatrix r = *this;
  for (auto& b : r.blocks_) b *= s;
  return r;
}

BlockDiagMatrix BlockDiagMatrix::inverse() const {
  BlockDiagMatrix r = *this;
  for (auto& b : r.blocks_) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible()) throw Error("BlockDiagMatrix: singular block");
    b = lu.inverse();
  }
  return r;
}

double BlockDiagMatrix::trace() const {
  double t = 0.0;
  for (const auto& b : blocks_) t += b.trace();
  return t;
}

double BlockDiagMatrix::trace_product(const BlockDiagMatrix& o) const {
  double t = 0.0;
  for (int i = 0; i < blocks(); ++i)
    t += blocks_[i].cwiseProduct(o.blocks_[i].transpose()).sum();
  return t;
}

double BlockDiagMatrix::max_asymmetry() const {
  double m = 0.0;
  for (const auto& b : blocks_)
    m = std::max(m, (b - b.transpose()).cwiseAbs().maxCoeff());
  return m;
}

void BlockDiagMatrix::symmetrize() {
  for (auto& b : blocks_) b = 0.5 * (b + b.transpose()).eval();
}

std::string SdpProblem::to_json() const {
  json j;
  j["L"] = structure.L;
  j["M"] = structure.M;
  j["n"] = structure.n;
  j["K"] = K();
  auto block_to_json = [](const Eigen::MatrixXd& m) {
    json arr = json::array();
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
  };
  j["C"] = json::array();
  for (const auto& c : C) j["C"].push_back(block_to_json(c));
  j["B"] = json::array();
  for (const auto& dual : B) {
    json blocks = json::array();
    size_t cursor = 0;
    for (int blk = 0; blk < structure.blocks(); ++blk) {
      int n = structure.sizes[size_t(blk)];
      if (cursor < dual.size() && dual[cursor].first == blk) {
        blocks.push_back(block_to_json(dual[cursor].second));
        ++cursor;
      } else {
        blocks.push_back(block_to_json(Eigen::MatrixXd::Zero(n, n)));
      }
    }
    j["B"].push_back(blocks);
  }
  j["a"] = json::array();
  for (int i = 0; i < a.size(); ++i) j["a"].push_back(a[i]);
  return j.dump();
}

SdpProblem SdpProblem::from_json(const std::string& text) {
  json j = json::parse(text);
  SdpProblem p;
  p.structure.L = j.at("L").get<int>();
  p.structure.M = j.at("M").get<int>();
  p.structure.n = j.at("n").get<int>();
  p.structure.sizes.assign(size_t(p.structure.L + p.structure.M),
                           p.structure.n);
  auto block_from = [&](const json& arr, int n) {
    Eigen::MatrixXd m(n, n);
    int k = 0;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = arr.at(k++).get<double>();
    return m;
  };
  int n = p.structure.n;
  for (const auto& c : j.at("C")) p.C.push_back(block_from(c, n));
  for (const auto& dual : j.at("B")) {
    std::vector<std::pair<int, Eigen::MatrixXd>> list;
    for (int blk = 0; blk < int(dual.size()); ++blk) {
      Eigen::MatrixXd m = block_from(dual.at(size_t(blk)), n);
      if (!m.isZero(0.0)) list.emplace_back(blk, m);
    }
    p.B.push_back(std::move(list));
  }
  std::vector<double> av = j.at("a").get<std::vector<double>>();
  p.a = Eigen::Map<Eigen::VectorXd>(av.data(), long(av.size()));
  return p;
}

bool SdpProblem::equals(const SdpProblem& o) const {
  if (structure.sizes != o.structure.sizes) return false;
  if (C.size() != o.C.size() || B.size() != o.B.size()) return false;
  if (a.size() != o.a.size() || a != o.a) return false;
  for (size_t i = 0; i < C.size(); ++i)
    if (C[i] != o.C[i]) return false;
  for (size_t i = 0; i < B.size(); ++i) {
    if (B[i].size() != o.B[i].size()) return false;
    for (size_t k = 0; k < B[i].size(); ++k) {
      if (B[i][k].first != o.B[i][k].first) return false;
      if (B[i][k].second != o.B[i][k].second) return false;
    }
  }
  return true;
}

SdpState init_state(const SdpProblem& prob) {
  SdpState s;
  s.X = BlockDiagMatrix::identity(prob.structure);
  s.Z = BlockDiagMatrix::identity(prob.structure);
  s.y = Eigen::VectorXd::Zero(prob.K());
  s.mu = s.Z.trace_product(s.X) / 3.0;
  double phi = 0.0;
  for (int j = 0; j < prob.structure.blocks(); ++j)
    phi += prob.C[size_t(j)].cwiseProduct(s.X.block(j)).sum();
  s.gap = phi - prob.a.dot(s.y);
  return s;
}

double max_step_block(const Eigen::MatrixXd& B, const Eigen::MatrixXd& D) {
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw Error("max_step_block: base matrix not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd A =
      L.triangularView<Eigen::Lower>().solve(D).transpose();
  A = L.triangularView<Eigen::Lower>().solve(A).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()));
  double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

namespace {

double trace_of_product(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return A.cwiseProduct(B.transpose()).sum();
}

bool block_pd(const Eigen::MatrixXd& m) {
  return Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success;
}

}  // namespace

SdpSolver::SdpSolver(const SdpProblem& prob, SolverOptions opts)
    : prob_(prob), opts_(std::move(opts)), fallback_pool_(1) {
  pool_ = opts_.pool ? opts_.pool : &fallback_pool_;
  incidence_.assign(size_t(prob_.structure.blocks()), {});
  for (int k = 0; k < int(prob_.B.size()); ++k)
    for (const auto& [blk, mat] : prob_.B[size_t(k)])
      incidence_[size_t(blk)].emplace_back(k, &mat);
}

void SdpSolver::prepare(const SdpState& state) {
  const int nb = prob_.structure.blocks();
  z_llt_.assign(size_t(nb), {});
  z_inv_.assign(size_t(nb), {});
  g_blocks_.assign(size_t(nb), {});
  std::atomic<bool> pd_ok{true};
  pool_->run_blocks(nb, [&](int j) {
    const Eigen::MatrixXd& Zj = state.Z.block(j);
    Eigen::LLT<Eigen::MatrixXd> llt(Zj);
    if (llt.info() != Eigen::Success) {
      pd_ok = false;
      return;
    }
    z_llt_[size_t(j)] = llt;
    int n = int(Zj.rows());
    z_inv_[size_t(j)] = llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd G = prob_.C[size_t(j)] + Zj;
    for (const auto& [k, mat] : incidence_[size_t(j)]) G -= state.y[k] * (*mat);
    g_blocks_[size_t(j)] = G;
  });
  if (!pd_ok) throw StallError("solver: Z block lost positive definiteness");
  prepared_ = true;
}

Directions SdpSolver::predictor(const SdpState& state) {
  prepare(state);
  const int nb = prob_.structure.blocks();
  const long long K = prob_.K();

  // per-block contributions to the Schur complement and to Omega_1
  std::vector<std::vector<double>> lambda_buf(static_cast<size_t>(nb));
  std::vector<std::vector<double>> omega_buf(static_cast<size_t>(nb));
  pool_->run_blocks(nb, [&](int j) {
    const auto& duals = incidence_[size_t(j)];
    const int m = int(duals.size());
    if (m == 0) return;
    const Eigen::MatrixXd& Xj = state.X.block(j);
    const Eigen::MatrixXd& Zi = z_inv_[size_t(j)];
    Eigen::MatrixXd V = Zi * g_blocks_[size_t(j)] * Xj;
    std::vector<Eigen::MatrixXd> U(static_cast<size_t>(m));
    for (int t = 0; t < m; ++t) U[size_t(t)] = Zi * (*duals[size_t(t)].second) * Xj;
    auto& lb = lambda_buf[size_t(j)];
    auto& ob = omega_buf[size_t(j)];
    lb.resize(size_t(m) * size_t(m));
    ob.resize(size_t(m));
    for (int s = 0; s < m; ++s) {
      ob[size_t(s)] = trace_of_product(*duals[size_t(s)].second, V);
      for (int t = 0; t < m; ++t)
        lb[size_t(s) * size_t(m) + size_t(t)] =
            trace_of_product(*duals[size_t(s)].second, U[size_t(t)]);
    }
  });

  // coordinator reduction in block order (worker-count independent)
  lambda_ = Eigen::MatrixXd::Zero(K, K);
  Eigen::VectorXd omega1 = -prob_.a;
  for (int j = 0; j < nb; ++j) {
    const auto& duals = incidence_[size_t(j)];
    const int m = int(duals.size());
    for (int s = 0; s < m; ++s) {
      omega1[duals[size_t(s)].first] += omega_buf[size_t(j)][size_t(s)];
      for (int t = 0; t < m; ++t)
        lambda_(duals[size_t(s)].first, duals[size_t(t)].first) +=
            lambda_buf[size_t(j)][size_t(s) * size_t(m) + size_t(t)];
    }
  }

  double max_abs = lambda_.cwiseAbs().maxCoeff();
  double asym = (lambda_ - lambda_.transpose()).cwiseAbs().maxCoeff();
  if (max_abs > 0 && asym > 1e-9 * max_abs)
    throw ConditioningError("Schur complement lost symmetry");
  lambda_ = 0.5 * (lambda_ + lambda_.transpose()).eval();

  factorizations_ = 0;
  lambda_llt_.compute(lambda_);
  ++factorizations_;
  if (lambda_llt_.info() != Eigen::Success) {
    double bump = 1e-12 * std::max(1.0, lambda_.trace()) / double(K);
    Eigen::MatrixXd reg = lambda_;
    for (int tries = 0; tries < 8 && lambda_llt_.info() != Eigen::Success;
         ++tries) {
      reg += bump * Eigen::MatrixXd::Identity(K, K);
      bump *= 1e3;
      lambda_llt_.compute(reg);
      ++factorizations_;
    }
    if (lambda_llt_.info() != Eigen::Success)
      throw ConditioningError(
          "Schur complement matrix is not positive definite");
  }

  Directions d;
  d.dy = lambda_llt_.solve(omega1);
  d.dX = BlockDiagMatrix(prob_.structure);
  d.dZ = BlockDiagMatrix(prob_.structure);
  pool_->run_blocks(nb, [&](int j) {
    const Eigen::MatrixXd& Xj = state.X.block(j);
    Eigen::MatrixXd dZ = -g_blocks_[size_t(j)];
    for (const auto& [k, mat] : incidence_[size_t(j)]) dZ += d.dy[k] * (*mat);
    Eigen::MatrixXd dX = -Xj - z_inv_[size_t(j)] * dZ * Xj;
    d.dZ.block(j) = dZ;
    d.dX.block(j) = 0.5 * (dX + dX.transpose());
  });
  return d;
}

Directions SdpSolver::corrector(const SdpState& state, const Directions& pred) {
  if (!prepared_) throw Error("corrector: predictor must run first");
  const int nb = prob_.structure.blocks();
  const long long K = prob_.K();
  const double mu = state.mu;

  std::vector<std::vector<double>> delta_buf(static_cast<size_t>(nb)), tau_buf(static_cast<size_t>(nb));
  std::vector<Eigen::MatrixXd> t_blocks(static_cast<size_t>(nb));
  pool_->run_blocks(nb, [&](int j) {
    const auto& duals = incidence_[size_t(j)];
    const int m = int(duals.size());
    const Eigen::MatrixXd& Zi = z_inv_[size_t(j)];
    t_blocks[size_t(j)] = Zi * pred.dZ.block(j) * pred.dX.block(j);
    if (m == 0) return;
    auto& db = delta_buf[size_t(j)];
    auto& tb = tau_buf[size_t(j)];
    db.resize(size_t(m));
    tb.resize(size_t(m));
    for (int s = 0; s < m; ++s) {
      db[size_t(s)] = trace_of_product(*duals[size_t(s)].second, Zi);
      tb[size_t(s)] =
          trace_of_product(*duals[size_t(s)].second, t_blocks[size_t(j)]);
    }
  });

  Eigen::VectorXd omega2 = Eigen::VectorXd::Zero(K);
  for (int j = 0; j < nb; ++j) {
    const auto& duals = incidence_[size_t(j)];
    for (int s = 0; s < int(duals.size()); ++s)
      omega2[duals[size_t(s)].first] +=
          mu * delta_buf[size_t(j)][size_t(s)] - tau_buf[size_t(j)][size_t(s)];
  }

  Directions d;
  d.dy = lambda_llt_.solve(omega2);
  d.dX = BlockDiagMatrix(prob_.structure);
  d.dZ = BlockDiagMatrix(prob_.structure);
  pool_->run_blocks(nb, [&](int j) {
    Eigen::MatrixXd dZ =
        Eigen::MatrixXd::Zero(prob_.structure.sizes[size_t(j)],
                              prob_.structure.sizes[size_t(j)]);
    for (const auto& [k, mat] : incidence_[size_t(j)]) dZ += d.dy[k] * (*mat);
    const Eigen::MatrixXd& Zi = z_inv_[size_t(j)];
    Eigen::MatrixXd dX =
        mu * Zi - t_blocks[size_t(j)] - Zi * dZ * state.X.block(j);
    d.dZ.block(j) = dZ;
    d.dX.block(j) = dX;
  });
  return d;
}

std::pair<double, double> SdpSolver::line_search(const SdpState& state,
                                                 const Directions& dir) const {
  const int nb = prob_.structure.blocks();
  double tx = std::numeric_limits<double>::infinity();
  double tz = std::numeric_limits<double>::infinity();
  for (int j = 0; j < nb; ++j) {
    tx = std::min(tx, max_step_block(state.X.block(j), dir.dX.block(j)));
    tz = std::min(tz, max_step_block(state.Z.block(j), dir.dZ.block(j)));
  }
  double tp = std::min(1.0, opts_.step_damp * tx);
  double td = std::min(1.0, opts_.step_damp * tz);
  // factorization check with backtracking against rounding
  auto verify = [&](double& t, const BlockDiagMatrix& base,
                    const BlockDiagMatrix& delta) {
    for (int tries = 0; tries < 200; ++tries) {
      bool ok = true;
      for (int j = 0; j < nb && ok; ++j)
        ok = block_pd(base.block(j) + t * delta.block(j));
      if (ok) return;
      t *= 0.9;
      if (t < 1e-12) throw StallError("line search step collapsed");
    }
    throw StallError("line search failed to certify positivity");
  };
  verify(tp, state.X, dir.dX);
  verify(td, state.Z, dir.dZ);
  return {tp, td};
}

SolveResult SdpSolver::solve() { return solve_from(init_state(prob_)); }

SolveResult SdpSolver::solve_from(SdpState state) {
  SolveResult res;
  const int nb = prob_.structure.blocks();
  const double dim = double(prob_.structure.total_dim());
  double prev_merit = std::numeric_limits<double>::infinity();
  int stall = 0;
  // best iterate so far; restored when late iterations destabilize
  double best_merit = std::numeric_limits<double>::infinity();
  SdpState best_state;
  bool have_best = false;

  auto objective = [&](const BlockDiagMatrix& X) {
    double phi = 0.0;
    for (int j = 0; j < nb; ++j)
      phi += prob_.C[size_t(j)].cwiseProduct(X.block(j)).sum();
    return phi;
  };
  auto primal_residual = [&](const BlockDiagMatrix& X) {
    double r = 0.0;
    for (long long k = 0; k < prob_.K(); ++k) {
      double bx = 0.0;
      for (const auto& [blk, mat] : prob_.B[size_t(k)])
        bx += mat.cwiseProduct(X.block(blk)).sum();
      r = std::max(r, std::abs(bx - prob_.a[k]));
    }
    return r / (1.0 + prob_.a.cwiseAbs().maxCoeff());
  };
  auto dual_residual = [&](const SdpState& s) {
    double r = 0.0;
    for (int j = 0; j < nb; ++j) {
      Eigen::MatrixXd G = prob_.C[size_t(j)] + s.Z.block(j);
      for (const auto& [k, mat] : incidence_[size_t(j)]) G -= s.y[k] * (*mat);
      r = std::max(r, G.cwiseAbs().maxCoeff());
    }
    return r;
  };

  for (int iter = 1; iter <= opts_.max_iter; ++iter) {
    Directions pred, corr;
    try {
      pred = predictor(state);
      corr = corrector(state, pred);
    } catch (const StallError&) {
      res.status = SolveStatus::Stalled;
      break;
    }

    Directions total;
    total.dX = pred.dX + corr.dX;
    total.dX.symmetrize();
    total.dZ = pred.dZ + corr.dZ;
    total.dy = pred.dy + corr.dy;

    double tp, td;
    try {
      std::tie(tp, td) = line_search(state, total);
    } catch (const StallError&) {
      res.status = SolveStatus::Stalled;
      break;
    }

    state.X = state.X + total.dX.scaled(tp);
    state.Z = state.Z + total.dZ.scaled(td);
    state.y += td * total.dy;
    state.X.symmetrize();
    state.Z.symmetrize();

    double phi = objective(state.X);
    double psi = prob_.a.dot(state.y);
    state.gap = phi - psi;
    double trzx = state.Z.trace_product(state.X);
    state.mu = opts_.mu_verbatim ? trzx / 3.0 : trzx / (3.0 * dim);

    res.iterations = iter;
    if (opts_.observer) opts_.observer(state, iter);

    double dres = dual_residual(state);
    double pres = primal_residual(state.X);

    if (std::abs(state.gap) <= opts_.eps && pres <= opts_.feas_tol &&
        dres <= opts_.feas_tol) {
      res.status = SolveStatus::Optimal;
      break;
    }
    if (std::abs(phi) > opts_.unbounded_limit) {
      res.status = SolveStatus::Unbounded;
      break;
    }
    if (state.y.cwiseAbs().maxCoeff() > opts_.unbounded_limit) {
      // dual blow-up without objective growth: numerical breakdown
      res.status = SolveStatus::Stalled;
      break;
    }
    double merit = std::abs(state.gap) + pres + dres;
    if (merit < best_merit) {
      best_merit = merit;
      best_state = state;
      have_best = true;
    }
    bool no_progress = merit > 0.999 * prev_merit;
    bool tiny_steps = std::min(tp, td) < 0.1;
    if (no_progress || tiny_steps)
      ++stall;
    else
      stall = 0;
    if (stall >= opts_.stall_limit) {
      res.status = SolveStatus::Infeasible;
      break;
    }
    prev_merit = merit;
  }

  if (res.status != SolveStatus::Optimal && have_best) {
    double final_merit = std::abs(state.gap);
    state.gap = std::abs(state.gap);
    if (best_merit < final_merit || !std::isfinite(final_merit))
      state = best_state;
  }
  res.state = std::move(state);
  res.gap = res.state.gap;
  return res;
}

SdpProblem LpStandardForm::to_sdp() const {
  SdpProblem p;
  p.structure.L = num_vars;
  p.structure.M = 0;
  p.structure.n = 1;
  p.structure.sizes.assign(size_t(num_vars), 1);
  p.C.reserve(size_t(num_vars));
  for (int j = 0; j < num_vars; ++j) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = c[j];
    p.C.push_back(m);
  }
  p.B.assign(size_t(b.size()), {});
  for (int j = 0; j < num_vars; ++j)
    for (const auto& [row, val] : columns[size_t(j)]) {
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = val;
      p.B[size_t(row)].emplace_back(j, m);
    }
  for (auto& list : p.B)
    std::sort(list.begin(), list.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  p.a = b;
  return p;
}

LpResult solve_lp(const LpStandardForm& lp, SolverOptions opts) {
  LpStandardForm scaled = lp;
  if (lp.var_scale != 1.0) scaled.b = lp.b / lp.var_scale;
  SdpProblem sdp = scaled.to_sdp();
  SdpSolver solver(sdp, opts);
  SolveResult r = solver.solve();
  LpResult out;
  out.status = r.status;
  out.iterations = r.iterations;
  out.x = Eigen::VectorXd(lp.num_vars);
  for (int j = 0; j < lp.num_vars; ++j)
    out.x[j] = lp.var_scale * r.state.X.block(j)(0, 0);
  out.objective = lp.c.dot(out.x);
  return out;
}

}  // namespace polycert
