#ifndef POLYCERT_SDP_HPP
#define POLYCERT_SDP_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "polycert/exponent.hpp"
#include "polycert/runtime.hpp"

namespace polycert {

struct BlockStructure {
  std::vector<int> sizes;
  // Populated for Polya problems: first L blocks then M blocks, all n x n.
  int L = 0;
  int M = 0;
  int n = 0;

  int blocks() const { return int(sizes.size()); }
  long long total_dim() const;
};

// Block-diagonal matrix; cross-block storage is never allocated.
class BlockDiagMatrix {
 public:
  BlockDiagMatrix() = default;
  explicit BlockDiagMatrix(const BlockStructure& s);
  static BlockDiagMatrix identity(const BlockStructure& s);

  int blocks() const { return int(blocks_.size()); }
  Eigen::MatrixXd& block(int i) { return blocks_[i]; }
  const Eigen::MatrixXd& block(int i) const { return blocks_[i]; }

  BlockDiagMatrix operator+(const BlockDiagMatrix& o) const;
  BlockDiagMatrix operator-(const BlockDiagMatrix& o) const;
  BlockDiagMatrix operator*(const BlockDiagMatrix& o) const;
  BlockDiagMatrix scaled(double s) const;
  BlockDiagMatrix inverse() const;  // throws if a block is singular

  double trace() const;
  double trace_product(const BlockDiagMatrix& o) const;
  double max_asymmetry() const;
  void symmetrize();

 private:
  std::vector<Eigen::MatrixXd> blocks_;
};

// Dual-index-major sparse storage of the constraint matrices B_i.
struct SdpProblem {
  BlockStructure structure;
  std::vector<Eigen::MatrixXd> C;  // one per block
  // B[i]: list of (block index, n_b x n_b symmetric matrix)
  std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>> B;
  Eigen::VectorXd a;

  // Metadata for recovering P(alpha) from y (Polya problems only).
  MultiExponentSet p_exponents;

  long long K() const { return static_cast<long long>(B.size()); }

  std::string to_json() const;
  static SdpProblem from_json(const std::string& text);
  bool equals(const SdpProblem& o) const;  // exact numeric equality
};

struct SdpState {
  BlockDiagMatrix X, Z;
  Eigen::VectorXd y;
  double mu = 0.0;
  double gap = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Stalled, IterationLimit, Unbounded };

struct SolveResult {
  SolveStatus status = SolveStatus::IterationLimit;
  SdpState state;
  double gap = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double eps = 1e-8;
  int max_iter = 200;
  double step_damp = 0.98;
  int stall_limit = 20;
  // Barrier update: tr(ZX)/3 as printed, or scaled by the total dimension.
  bool mu_verbatim = false;
  double feas_tol = 1e-7;
  double unbounded_limit = 1e11;
  WorkerPool* pool = nullptr;
  SetupStats* stats = nullptr;
  // Called after each accepted iterate (tests use this to check invariants).
  std::function<void(const SdpState&, int iter)> observer;
};

SdpState init_state(const SdpProblem& prob);

struct Directions {
  BlockDiagMatrix dX, dZ;
  Eigen::VectorXd dy;
};

// One predictor/corrector pass from a given state; exposed for tests.
class SdpSolver {
 public:
  SdpSolver(const SdpProblem& prob, SolverOptions opts = {});

  SolveResult solve();
  SolveResult solve_from(SdpState state);

  // Single components (state must have X, Z > 0).
  Directions predictor(const SdpState& state);
  Directions corrector(const SdpState& state, const Directions& pred);
  std::pair<double, double> line_search(const SdpState& state,
                                        const Directions& dir) const;

  int factorizations_last_iter() const { return factorizations_; }
  const Eigen::MatrixXd& schur() const { return lambda_; }

 private:
  void prepare(const SdpState& state);

  const SdpProblem& prob_;
  SolverOptions opts_;
  WorkerPool fallback_pool_;
  WorkerPool* pool_ = nullptr;

  // per-block dual incidence: blocks_duals_[j] = {(dual k, matrix ptr)}
  std::vector<std::vector<std::pair<int, const Eigen::MatrixXd*>>> incidence_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> z_llt_;
  std::vector<Eigen::MatrixXd> z_inv_;
  std::vector<Eigen::MatrixXd> g_blocks_;
  Eigen::MatrixXd lambda_;
  Eigen::LLT<Eigen::MatrixXd> lambda_llt_;
  int factorizations_ = 0;
  bool prepared_ = false;
};

// max t in (0,1] with B + t * D > 0 for one symmetric block pair.
double max_step_block(const Eigen::MatrixXd& B, const Eigen::MatrixXd& D);

// Standard-form LP: max c'x s.t. Ax = b, x >= 0, mapped to 1x1 blocks.
struct LpStandardForm {
  int num_vars = 0;
  Eigen::VectorXd c;
  Eigen::VectorXd b;
  // columns[j]: list of (row, value)
  std::vector<std::vector<std::pair<int, double>>> columns;
  // solve_lp substitutes x = var_scale * x~ so solutions of magnitude
  // var_scale sit near the identity starting point
  double var_scale = 1.0;

  SdpProblem to_sdp() const;
};

struct LpResult {
  SolveStatus status = SolveStatus::IterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

LpResult solve_lp(const LpStandardForm& lp, SolverOptions opts = {});

}  // namespace polycert

#endif
