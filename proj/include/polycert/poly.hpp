#ifndef POLYCERT_POLY_HPP
#define POLYCERT_POLY_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "polycert/exponent.hpp"

namespace polycert {

struct VarGroup {
  std::string name;
  int size = 0;
};

using DegreeVector = std::vector<int>;

// Sparse multivariate polynomial with square real matrix coefficients over
// named variable groups. Scalar polynomials use n == 1.
class MatrixPolynomial {
 public:
  using TermMap = std::map<Exponent, Eigen::MatrixXd, LexBefore>;

  MatrixPolynomial() = default;
  MatrixPolynomial(std::vector<VarGroup> groups, int n);

  static MatrixPolynomial scalar(int num_vars);

  int n() const { return n_; }
  int num_vars() const { return num_vars_; }
  const std::vector<VarGroup>& groups() const { return groups_; }
  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Adds coeff to the term at exp; removes the term if it becomes zero.
  void add_term(const Exponent& exp, const Eigen::MatrixXd& coeff);
  void set_term(const Exponent& exp, const Eigen::MatrixXd& coeff);
  Eigen::MatrixXd coeff(const Exponent& exp) const;

  int total_degree() const;
  // Max degree per variable group.
  DegreeVector group_degrees() const;
  // Per-group degree of one exponent.
  DegreeVector group_degree_of(const Exponent& exp) const;
  bool is_homogeneous() const;
  bool is_multi_homogeneous(DegreeVector* degrees = nullptr) const;

  // Symmetrizes every coefficient; throws if asymmetry exceeds 1e-9.
  void symmetrize();
  bool all_coeffs_symmetric(double tol = 1e-12) const;

  MatrixPolynomial operator+(const MatrixPolynomial& other) const;
  MatrixPolynomial operator-(const MatrixPolynomial& other) const;
  MatrixPolynomial scaled(double s) const;
  MatrixPolynomial transpose() const;
  // Matrix product; variable groups must match.
  MatrixPolynomial operator*(const MatrixPolynomial& other) const;

  Eigen::MatrixXd eval(const std::vector<double>& point) const;

  // Substitute alpha_i = scale[i] * beta_i + offset[i] per variable.
  MatrixPolynomial compose_affine(const std::vector<double>& scale,
                                  const std::vector<double>& offset) const;

  std::string to_json() const;
  static MatrixPolynomial from_json(const std::string& text);

 private:
  std::vector<VarGroup> groups_;
  int n_ = 0;
  int num_vars_ = 0;
  TermMap terms_;
};

// (sum of group variables)^power as a scalar polynomial over the same vars,
// restricted to one group.
MatrixPolynomial simplex_form_power(const std::vector<VarGroup>& groups,
                                    int group_index, int power, int n);

// Multiplies each monomial by (sum alpha_j)^(d_target - deg); single group.
MatrixPolynomial homogenize_simplex(const MatrixPolynomial& a,
                                    int target_degree = -1);

// Claim 1: multiply monomial k by prod_i (sum_j alpha_ij)^(T_i - t_i^(k)).
MatrixPolynomial multihomogenize(const MatrixPolynomial& f);

struct HypercubeMapResult {
  MatrixPolynomial poly;       // over pairs (alpha_i, beta_i)
  DegreeVector degree_vector;  // T_i per coordinate
};

// Claim 2: represent F over |x_i| <= r_i as a multi-homogeneous polynomial
// over n copies of the 2-simplex, alpha_i = (x_i + r_i) / (2 r_i).
HypercubeMapResult hypercube_to_multisimplex(const MatrixPolynomial& f,
                                             const std::vector<double>& radii);

// <grad V, f> for a scalar polynomial V and vector field f (scalar polys).
MatrixPolynomial grad_contract(const MatrixPolynomial& v,
                               const std::vector<MatrixPolynomial>& field);

MatrixPolynomial derivative(const MatrixPolynomial& p, int var);

}  // namespace polycert

#endif
