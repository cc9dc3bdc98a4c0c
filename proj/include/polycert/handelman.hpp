#ifndef POLYCERT_HANDELMAN_HPP
#define POLYCERT_HANDELMAN_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "polycert/poly.hpp"
#include "polycert/sdp.hpp"

namespace polycert {

// Convex polytope {x : w_i'x + u_i >= 0}.
struct Polytope {
  Eigen::MatrixXd W;  // rows are facet normals
  Eigen::VectorXd u;

  int facets() const { return int(W.rows()); }
  int dim() const { return int(W.cols()); }
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
  static Polytope from_vertices_2d(const std::vector<Eigen::Vector2d>& verts);
};

// Vertex enumeration by facet intersection; intended for dim <= 4.
std::vector<Eigen::VectorXd> enumerate_vertices(const Polytope& p,
                                                double tol = 1e-9);

struct SubPolytope {
  Eigen::MatrixXd H;  // rows h_{i,j}
  Eigen::VectorXd g;
  std::vector<Eigen::VectorXd> vertices;

  int facets() const { return int(H.rows()); }
  int dim() const { return int(H.cols()); }
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
  // Vertices lying on facet j.
  std::vector<Eigen::VectorXd> facet_vertices(int j, double tol = 1e-9) const;
};

struct FacetMatch {
  int region_i = 0, facet_k = 0;
  int region_j = 0, facet_l = 0;
};

struct DDecomposition {
  std::vector<SubPolytope> parts;
  std::vector<FacetMatch> shared_facets;  // Lambda_{i,j} pairs

  int regions() const { return int(parts.size()); }
  // Index of a region containing x (largest minimum slack).
  int region_of(const Eigen::VectorXd& x) const;
};

// Cones the origin over every facet of the polytope. Requires the origin
// inside the polytope (strictly, or on the boundary at a vertex).
DDecomposition d_decompose(const Polytope& p);
// Orthant pattern for a box |x_i| <= r_i (2^n sub-boxes).
DDecomposition d_decompose_box_quadrants(const std::vector<double>& radii);
// User-supplied regions taken verbatim; adjacency detected by vertex sets.
DDecomposition d_decompose_explicit(std::vector<SubPolytope> parts);

// Handelman basis E_{d,K}: exponents with |alpha|_1 <= d, ascending order.
std::vector<Exponent> enumerate_basis(int K, int d);

// Scalar polynomial in x as a coefficient map over monomials.
using ScalarPoly = std::map<Exponent, double, LexBefore>;
ScalarPoly expand_basis_element(const SubPolytope& part, const Exponent& alpha);

// Affine maps of Definition 6.7, represented as dense matrices acting on
// the coefficient vector b of one region.
struct HandelmanMaps {
  std::vector<Exponent> basis;       // E_{d,m}
  std::vector<Exponent> monomials;   // rows of F: E_{d,n}
  Eigen::MatrixXd F;                 // coefficients of P_i
  Eigen::MatrixXd Hsq;               // coefficients of x_j^2 terms (n rows)
  std::vector<Eigen::MatrixXd> J;    // per facet: restriction coefficients
  Eigen::MatrixXd R;                 // selector of S_{d,m} entries
  std::vector<int> r_members;        // basis indices selected by R
};

HandelmanMaps build_maps(const SubPolytope& part, int d);

// G map: coefficients of <grad P_i, f> over E_{d + df - 1, n} monomials.
struct GradientMap {
  std::vector<Exponent> monomials;
  Eigen::MatrixXd G;
};
GradientMap build_gradient_map(const SubPolytope& part, int d,
                               const std::vector<MatrixPolynomial>& field);

struct HandelmanCertificate {
  int d = 0;
  double gamma = 0.0;
  std::vector<Eigen::VectorXd> b;  // one per region
  std::vector<Eigen::VectorXd> c;

  // Evaluate the piecewise Lyapunov function.
  double value(const DDecomposition& dec, const Eigen::VectorXd& x) const;
  double value_region(const DDecomposition& dec, int region,
                      const Eigen::VectorXd& x) const;
};

struct HandelmanLp {
  LpStandardForm lp;
  // layout metadata
  int regions = 0;
  int d = 0;
  int df = 0;
  // pinned entries (the S_{d,m} selectors of the R map) are eliminated
  // from the variable list; b_keep maps LP columns back to basis indices
  std::vector<int> b_offset, b_size;
  std::vector<std::vector<int>> b_keep;
  std::vector<int> b_full_size;
  std::vector<int> c_offset, c_size;

  Eigen::VectorXd expand_b(int region, const Eigen::VectorXd& x) const;
  int gamma_var = 0;      // gamma = x[gamma_var] - gamma_shift
  double gamma_shift = 0.0;
  // counts per the complexity model of the LP (Sec. "assemble_lp" tests)
  long long model_vars = 0;
  long long model_cons = 0;
};

HandelmanLp assemble_lp(const DDecomposition& dec,
                        const std::vector<MatrixPolynomial>& field, int d,
                        double gamma_cap = 1.0);

struct LyapunovSearchResult {
  bool feasible = false;
  HandelmanCertificate certificate;
  SolveStatus last_status = SolveStatus::Infeasible;
  double last_gamma = 0.0;
  int last_d = 0;
};

LyapunovSearchResult find_lyapunov(const DDecomposition& dec,
                                   const std::vector<MatrixPolynomial>& field,
                                   int d_max, SolverOptions opts = {},
                                   double gamma_tol = 1e-7);

// Largest c with {V <= c} inside the polytope; dense facet sampling with
// local refinement on 2-D facets.
double largest_inscribed_sublevel(const HandelmanCertificate& cert,
                                  const DDecomposition& dec,
                                  const Polytope& gamma_set,
                                  int samples_per_facet = 10000);

// Closed polyline of the V = level set boundary (2-D only).
std::vector<Eigen::Vector2d> level_set_polyline(
    const HandelmanCertificate& cert, const DDecomposition& dec, double level,
    int rays = 360);

struct PolytopeMinResult {
  double bound = 0.0;
  int final_d = 0;
  std::vector<double> bounds_by_degree;
};

// Algorithm: Handelman LP bound for min of f over the polytope.
PolytopeMinResult min_poly_over_polytope(const MatrixPolynomial& f,
                                         const Polytope& gamma_set, int d_max,
                                         double eps      = 1e-7,
                                         SolverOptions opts = {});

}  // namespace polycert

#endif
