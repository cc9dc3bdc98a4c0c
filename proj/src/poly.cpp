#include "polycert/poly.hpp"

#include <cmath>

#include "json.hpp"
#include "polycert/util.hpp"

namespace polycert {

using nlohmann::json;

MatrixPolynomial::MatrixPolynomial(std::vector<VarGroup> groups, int n)
    : groups_(std::move(groups)), n_(n) {
  for (const auto& g : groups_) num_vars_ += g.size;
}

MatrixPolynomial MatrixPolynomial::scalar(int num_vars) {
  return MatrixPolynomial({{"x", num_vars}}, 1);
}

void MatrixPolynomial::add_term(const Exponent& exp,
                                const Eigen::MatrixXd& coeff) {
  if (int(exp.size()) != num_vars_)
    throw Error("add_term: exponent length mismatch");
  auto [it, inserted] = terms_.try_emplace(exp, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second.isZero(0.0)) terms_.erase(it);
  } else if (coeff.isZero(0.0)) {
    terms_.erase(it);
  }
}

void MatrixPolynomial::set_term(const Exponent& exp,
                                const Eigen::MatrixXd& coeff) {
  if (int(exp.size()) != num_vars_)
    throw Error("set_term: exponent length mismatch");
  if (coeff.isZero(0.0))
    terms_.erase(exp);
  else
    terms_[exp] = coeff;
}

Eigen::MatrixXd MatrixPolynomial::coeff(const Exponent& exp) const {
  auto it = terms_.find(exp);
  if (it != terms_.end()) return it->second;
  return Eigen::MatrixXd::Zero(n_, n_);
}

int MatrixPolynomial::total_degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, degree(e));
  return d;
}

DegreeVector MatrixPolynomial::group_degree_of(const Exponent& exp) const {
  DegreeVector out(groups_.size(), 0);
  int off = 0;
  for (size_t g = 0; g < groups_.size(); ++g) {
    for (int i = 0; i < groups_[g].size; ++i) out[g] += exp[off + i];
    off += groups_[g].size;
  }
  return out;
}

DegreeVector MatrixPolynomial::group_degrees() const {
  DegreeVector out(groups_.size(), 0);
  for (const auto& [e, c] : terms_) {
    DegreeVector d = group_degree_of(e);
    for (size_t g = 0; g < out.size(); ++g) out[g] = std::max(out[g], d[g]);
  }
  return out;
}

bool MatrixPolynomial::is_homogeneous() const {
  int d = -1;
  for (const auto& [e, c] : terms_) {
    if (d < 0) d = degree(e);
    if (degree(e) != d) return false;
  }
  return true;
}

bool MatrixPolynomial::is_multi_homogeneous(DegreeVector* degrees) const {
  DegreeVector ref;
  for (const auto& [e, c] : terms_) {
    DegreeVector d = group_degree_of(e);
    if (ref.empty())
      ref = d;
    else if (d != ref)
      return false;
  }
  if (degrees) *degrees = ref;
  return true;
}

void MatrixPolynomial::symmetrize() {
  for (auto& [e, c] : terms_) {
    double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9)
      throw Error("symmetric coefficient expected; asymmetry " +
                  std::to_string(asym));
    c = 0.5 * (c + c.transpose());
  }
}

bool MatrixPolynomial::all_coeffs_symmetric(double tol) const {
  for (const auto& [e, c] : terms_)
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

MatrixPolynomial MatrixPolynomial::operator+(
    const MatrixPolynomial& other) const {
  MatrixPolynomial out = *this;
  for (const auto& [e, c] : other.terms_) out.add_term(e, c);
  return out;
}

MatrixPolynomial MatrixPolynomial::operator-(
    const MatrixPolynomial& other) const {
  MatrixPolynomial out = *this;
  for (const auto& [e, c] : other.terms_) out.add_term(e, -c);
  return out;
}

MatrixPolynomial MatrixPolynomial::scaled(double s) const {
  MatrixPolynomial out(groups_, n_);
  if (s == 0.0) return out;
  for (const auto& [e, c] : terms_) out.set_term(e, s * c);
  return out;
}

MatrixPolynomial MatrixPolynomial::transpose() const {
  MatrixPolynomial out(groups_, n_);
  for (const auto& [e, c] : terms_) out.set_term(e, c.transpose());
  return out;
}

MatrixPolynomial MatrixPolynomial::operator*(
    const MatrixPolynomial& other) const {
  if (num_vars_ != other.num_vars_)
    throw Error("polynomial product: variable count mismatch");
  MatrixPolynomial out(groups_, n_);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : other.terms_) {
      Exponent e(ea.size());
      for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

Eigen::MatrixXd MatrixPolynomial::eval(const std::vector<double>& point) const {
  if (int(point.size()) != num_vars_)
    throw Error("eval: point dimension mismatch");
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& [e, c] : terms_) {
    double m = 1.0;
    for (size_t i = 0; i < e.size(); ++i)
      for (int k = 0; k < e[i]; ++k) m *= point[i];
    acc += m * c;
  }
  return acc;
}

MatrixPolynomial MatrixPolynomial::compose_affine(
    const std::vector<double>& scale, const std::vector<double>& offset) const {
  if (int(scale.size()) != num_vars_ || int(offset.size()) != num_vars_)
    throw Error("compose_affine: dimension mismatch");
  MatrixPolynomial out(groups_, n_);
  for (const auto& [e, c] : terms_) {
    // expand prod_i (scale_i x_i + offset_i)^{e_i}
    std::map<Exponent, double, LexBefore> expansion;
    expansion[Exponent(num_vars_, 0)] = 1.0;
    for (int i = 0; i < num_vars_; ++i) {
      if (e[i] == 0) continue;
      std::map<Exponent, double, LexBefore> next;
      for (int k = 0; k <= e[i]; ++k) {
        double w = binomial(e[i], k) * std::pow(scale[i], k) *
                   std::pow(offset[i], e[i] - k);
        if (w == 0.0) continue;
        for (const auto& [base, bw] : expansion) {
          Exponent ne = base;
          ne[i] += k;
          next[ne] += bw * w;
        }
      }
      expansion.swap(next);
    }
    for (const auto& [ne, w] : expansion)
      if (w != 0.0) out.add_term(ne, w * c);
  }
  return out;
}

std::string MatrixPolynomial::to_json() const {
  json j;
  j["groups"] = json::array();
  for (const auto& g : groups_)
    j["groups"].push_back({{"name", g.name}, {"size", g.size}});
  j["n"] = n_;
  j["terms"] = json::array();
  for (const auto& [e, c] : terms_) {
    json rows = json::array();
    for (int r = 0; r < n_; ++r) {
      json row = json::array();
      for (int k = 0; k < n_; ++k) row.push_back(c(r, k));
      rows.push_back(row);
    }
    j["terms"].push_back({{"exp", e}, {"coef", rows}});
  }
  return j.dump(2);
}

MatrixPolynomial MatrixPolynomial::from_json(const std::string& text) {
  json j = json::parse(text);
  std::vector<VarGroup> groups;
  for (const auto& g : j.at("groups"))
    groups.push_back({g.at("name").get<std::string>(), g.at("size").get<int>()});
  int n = j.at("n").get<int>();
  MatrixPolynomial out(groups, n);
  for (const auto& t : j.at("terms")) {
    Exponent e = t.at("exp").get<Exponent>();
    Eigen::MatrixXd c(n, n);
    const auto& rows = t.at("coef");
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < n; ++k) c(r, k) = rows.at(r).at(k).get<double>();
    out.add_term(e, c);
  }
  return out;
}

MatrixPolynomial simplex_form_power(const std::vector<VarGroup>& groups,
                                    int group_index, int power, int n) {
  MatrixPolynomial out(groups, n);
  int num_vars = out.num_vars();
  int off = 0;
  for (int g = 0; g < group_index; ++g) off += groups[g].size;
  int size = groups[group_index].size;
  for (const Exponent& e : exponent_set(size, power)) {
    Exponent full(num_vars, 0);
    for (int i = 0; i < size; ++i) full[off + i] = e[i];
    std::vector<int> parts(e.begin(), e.end());
    out.add_term(full, multinomial(power, parts) *
                           Eigen::MatrixXd::Identity(n, n));
  }
  return out;
}

MatrixPolynomial homogenize_simplex(const MatrixPolynomial& a,
                                    int target_degree) {
  if (a.groups().size() != 1)
    throw Error("homogenize_simplex: single variable group expected");
  int da = a.total_degree();
  if (target_degree >= 0) {
    if (target_degree < da)
      throw Error("homogenize_simplex: target degree below polynomial degree");
    da = target_degree;
  }
  MatrixPolynomial out(a.groups(), a.n());
  for (const auto& [e, c] : a.terms()) {
    int gap = da - degree(e);
    if (gap == 0) {
      out.add_term(e, c);
      continue;
    }
    MatrixPolynomial mono(a.groups(), a.n());
    mono.add_term(e, c);
    out = out + mono * simplex_form_power(a.groups(), 0, gap, a.n());
  }
  return out;
}

MatrixPolynomial multihomogenize(const MatrixPolynomial& f) {
  DegreeVector target = f.group_degrees();
  MatrixPolynomial out(f.groups(), f.n());
  for (const auto& [e, c] : f.terms()) {
    DegreeVector t = f.group_degree_of(e);
    MatrixPolynomial mono(f.groups(), f.n());
    mono.add_term(e, c);
    for (size_t g = 0; g < target.size(); ++g) {
      int gap = target[g] - t[g];
      if (gap > 0)
        mono = mono * simplex_form_power(f.groups(), int(g), gap, f.n());
    }
    out = out + mono;
  }
  return out;
}

HypercubeMapResult hypercube_to_multisimplex(const MatrixPolynomial& f,
                                             const std::vector<double>& radii) {
  const int nv = f.num_vars();
  if (int(radii.size()) != nv)
    throw Error("hypercube_to_multisimplex: radius count mismatch");
  for (double r : radii)
    if (r <= 0.0) throw Error("hypercube_to_multisimplex: radius must be > 0");

  // Q(alpha) = F(2 r alpha - r) over alpha in [0,1]^n.
  std::vector<double> scale(nv), offset(nv);
  for (int i = 0; i < nv; ++i) {
    scale[i] = 2.0 * radii[i];
    offset[i] = -radii[i];
  }
  MatrixPolynomial q = f.compose_affine(scale, offset);

  // Pair each alpha_i with beta_i = 1 - alpha_i and homogenize per pair.
  std::vector<VarGroup> pair_groups;
  for (int i = 0; i < nv; ++i) {
    std::string base =
        nv == 1 ? "a" : "a" + std::to_string(i + 1);
    pair_groups.push_back({base, 2});
  }
  MatrixPolynomial lifted(pair_groups, f.n());
  for (const auto& [e, c] : q.terms()) {
    Exponent le(2 * nv, 0);
    for (int i = 0; i < nv; ++i) le[2 * i] = e[i];
    lifted.add_term(le, c);
  }
  MatrixPolynomial homog = multihomogenize(lifted);
  DegreeVector dv = homog.group_degrees();
  return {homog, dv};
}

MatrixPolynomial derivative(const MatrixPolynomial& p, int var) {
  MatrixPolynomial out(p.groups(), p.n());
  for (const auto& [e, c] : p.terms()) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d[var] -= 1;
    out.add_term(d, double(e[var]) * c);
  }
  return out;
}

MatrixPolynomial grad_contract(const MatrixPolynomial& v,
                               const std::vector<MatrixPolynomial>& field) {
  if (v.n() != 1) throw Error("grad_contract: scalar polynomial expected");
  if (int(field.size()) != v.num_vars())
    throw Error("grad_contract: field dimension mismatch");
  MatrixPolynomial out(v.groups(), 1);
  for (int i = 0; i < v.num_vars(); ++i)
    out = out + derivative(v, i) * field[i];
  return out;
}

}  // namespace polycert
