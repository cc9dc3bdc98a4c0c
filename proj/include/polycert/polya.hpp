#ifndef POLYCERT_POLYA_HPP
#define POLYCERT_POLYA_HPP

#include <optional>

#include "polycert/poly.hpp"
#include "polycert/runtime.hpp"
#include "polycert/sdp.hpp"

namespace polycert {

// Coefficients beta_{<h>,<gamma>} with gamma enumerated over a product of
// exponent sets (one group reproduces the single-simplex tables).
struct BetaTable {
  MultiExponentSet h_set;
  MultiExponentSet gamma_set;
  // cols[gamma_flat][h_flat]
  std::vector<Eigen::VectorXd> cols;

  double at(long long h_flat, long long gamma_flat) const {
    return cols[gamma_flat][h_flat];
  }
};

struct HTable {
  MultiExponentSet h_set;
  MultiExponentSet gamma_set;
  int n = 0;
  // cols[gamma_flat][h_flat], each n x n
  std::vector<std::vector<Eigen::MatrixXd>> cols;

  const Eigen::MatrixXd& at(long long h_flat, long long gamma_flat) const {
    return cols[gamma_flat][h_flat];
  }
};

BetaTable compute_beta(int l, int dp, int d1, WorkerPool* pool = nullptr,
                       SetupStats* stats = nullptr);
// A must be homogeneous of degree da over a single group of size l.
HTable compute_H(const MatrixPolynomial& A, int l, int dp, int da, int d2,
                 WorkerPool* pool = nullptr, SetupStats* stats = nullptr);

BetaTable compute_beta_multi(const std::vector<int>& group_sizes,
                             const DegreeVector& Dp, int d1,
                             WorkerPool* pool = nullptr,
                             SetupStats* stats = nullptr);
HTable compute_H_multi(const MatrixPolynomial& A, const DegreeVector& Dp,
                       int d2, WorkerPool* pool = nullptr,
                       SetupStats* stats = nullptr);

// Canonical basis of S^n: diagonal first, then off-diagonal pairs by
// diagonal offset; pair entries are set to one in both positions.
std::vector<Eigen::MatrixXd> sym_basis(int n);

SdpProblem assemble_sdp(int dp, const MatrixPolynomial& A, int d1, int d2,
                        double delta, WorkerPool* pool = nullptr,
                        SetupStats* stats = nullptr);
SdpProblem assemble_sdp_multi(const DegreeVector& Dp,
                              const MatrixPolynomial& A, int d1, int d2,
                              double delta, WorkerPool* pool = nullptr,
                              SetupStats* stats = nullptr);

// Rebuild P(alpha) from the dual vector y of an assembled problem.
MatrixPolynomial recover_P(const SdpProblem& prob, const Eigen::VectorXd& y);

// Polya bisection for min of a scalar polynomial over the unit simplex.
struct SimplexMinResult {
  double bound = 0.0;
  int final_e = 0;     // largest Polya exponent used on an accepted trial
  int iterations = 0;
};
SimplexMinResult min_poly_over_simplex(const MatrixPolynomial& f, int e_max,
                                       double gamma_lo, double gamma_hi,
                                       int b_max = 25);

// Habicht and per-orthant nonnegativity tests.
struct OrthantVerdict {
  std::vector<int> signs;  // entries in {-1, +1}
  int lambda = -1;         // first certifying exponent, -1 if inconclusive
};
struct GlobalTestReport {
  bool habicht_applicable = false;  // requires homogeneous input
  int habicht_e = -1;
  std::vector<OrthantVerdict> orthants;
  bool nonnegative_on_Rn = false;
};
GlobalTestReport global_nonnegativity_tests(const MatrixPolynomial& f,
                                            int e_max);

}  // namespace polycert

#endif
