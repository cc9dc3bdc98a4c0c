#ifndef POLYCERT_STABILITY_HPP
#define POLYCERT_STABILITY_HPP

#include <functional>
#include <optional>
#include <string>

#include "polycert/handelman.hpp"
#include "polycert/polya.hpp"

namespace polycert {

enum class Verdict { Stable, Infeasible, Unstable, Error };

std::string verdict_name(Verdict v);

struct ValidationStats {
  int samples = 0;
  double min_eig_P = 0.0;           // over the sampled domain
  double max_eig_lyap = 0.0;        // max eigenvalue of A'P + PA
  bool passed = false;
};

struct StabilityReport {
  Verdict verdict = Verdict::Error;
  double bound = 0.0;               // L, r, rho or s when a bisection ran
  int dp = 0;
  DegreeVector Dp;
  int d1 = 0, d2 = 0;
  double delta = 1e-2;
  int iterations = 0;
  SolveStatus solver_status = SolveStatus::IterationLimit;
  MatrixPolynomial P;
  ValidationStats validation;
  std::string note;

  std::string to_json() const;
};

struct PipelineOptions {
  double delta = 1e-2;
  double eps = 1e-7;
  int max_iter = 200;
  WorkerPool* pool = nullptr;
  int validation_samples = 1000;
  uint64_t seed = 20240801;
};

// homogenize -> beta/H -> assemble -> solve -> grid validation
StabilityReport robust_stability_simplex(const MatrixPolynomial& A, int dp,
                                         int d1, int d2,
                                         const PipelineOptions& opts = {});

// Claim 2 lift of A(x) over |x_i| <= r_i, multi-simplex pipeline,
// Dp is the per-pair degree vector of P.
StabilityReport robust_stability_hypercube(const MatrixPolynomial& A,
                                           const std::vector<double>& radii,
                                           const DegreeVector& Dp, int d1,
                                           int d2,
                                           const PipelineOptions& opts = {});

struct BisectionConfig {
  double lo = 0.0;       // certified end
  double hi = 1.0;       // uncertified end
  int iterations = 20;
  bool verify_ends = true;
};

struct BisectionResult {
  double bound = 0.0;
  int trials = 0;
  bool lo_feasible = false;
  bool hi_feasible = false;
  std::vector<std::pair<double, bool>> history;
};

// Generic scalar bisection over a monotone feasibility predicate.
BisectionResult bisect_scalar(const BisectionConfig& cfg,
                              const std::function<bool(double)>& feasible);

// Ch.4 style: minimize L with S_L = {sum a = 2L+1, L <= a_i <= 1} mapped
// onto the unit simplex by g_i(a) = (1-L) a_i + L.
struct UncertaintyBound {
  double bound = 0.0;
  StabilityReport last_feasible;
  BisectionResult bisection;
};
UncertaintyBound max_uncertainty_simplex(const MatrixPolynomial& A, int dp,
                                         int d1, int d2,
                                         const BisectionConfig& cfg,
                                         const PipelineOptions& opts = {});

// Ch.5 style: maximize r with |alpha_i| <= r.
UncertaintyBound max_hypercube_radius(
    const MatrixPolynomial& A0_plus_terms, const std::vector<double>& radii_at_1,
    const DegreeVector& Dp, int d1, int d2, const BisectionConfig& cfg,
    const PipelineOptions& opts = {});

// Region-of-attraction search: scale polytope vertices by s, Handelman LP.
struct RoaShape {
  std::string name;
  std::vector<Eigen::Vector2d> vertices;
  std::string decomposition = "fan";  // or "quadrant"
};

struct RoaResult {
  double s_star = 0.0;
  bool capped = false;
  HandelmanCertificate certificate;
  DDecomposition decomposition;  // at s_star
  double level = 0.0;            // largest inscribed sub-level value
  BisectionResult bisection;
};

RoaResult nonlinear_roa(const std::vector<MatrixPolynomial>& field,
                        const RoaShape& shape, int degree,
                        const BisectionConfig& cfg,
                        const PipelineOptions& opts = {},
                        double gamma_tol = 1e-7);

// Tokamak case study from the checked-in transcription.
struct TokamakResult {
  double rho_normalized = 0.0;
  bool within_reference_band = false;
  bool nominal_stable = false;
  std::string note;
  BisectionResult bisection;
};
TokamakResult tokamak_case_study(int dp, int d1, int d2,
                                 const BisectionConfig& cfg,
                                 const PipelineOptions& opts = {});

// Validation grids (independent of the solver path).
ValidationStats validate_simplex_certificate(const MatrixPolynomial& A,
                                             const MatrixPolynomial& P,
                                             int samples, uint64_t seed);
ValidationStats validate_hypercube_certificate(const MatrixPolynomial& A,
                                               const std::vector<double>& radii,
                                               const MatrixPolynomial& P_pairs,
                                               int samples, uint64_t seed);

// Plot-data emission.
std::string csv_bound_sweep(const std::vector<std::array<double, 3>>& rows);
std::string csv_polyline(const std::vector<Eigen::Vector2d>& pts);

// data loaders (verified against the manifest)
MatrixPolynomial load_ch4_example2();
void load_ch5_example2(MatrixPolynomial* A, std::vector<double>* radii);
void load_ch5_example3(MatrixPolynomial* A_at_unit_radius);
void load_ch6_example1(std::vector<MatrixPolynomial>* field, Polytope* gamma,
                       std::vector<SubPolytope>* regions);
void load_vanderpol(std::vector<MatrixPolynomial>* field,
                    std::vector<RoaShape>* shapes,
                    std::vector<double>* s_targets);

}  // namespace polycert

#endif
